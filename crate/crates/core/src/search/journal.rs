use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::estimator::{ResistanceEstimate, Timing};
use crate::sat::SolveBudget;

/// Sampling statistics behind an estimated `G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    #[serde(rename = "N")]
    pub sample_size: usize,
    pub seed: u64,
    pub budget: SolveBudget,
    pub successes: usize,
    pub xi_bar: f64,
    pub stderr: f64,
}

impl SampleStats {
    pub fn from_estimate(est: &ResistanceEstimate) -> Self {
        SampleStats {
            sample_size: est.sample_size,
            seed: est.seed,
            budget: est.budget,
            successes: est.successes,
            xi_bar: est.xi_bar,
            stderr: est.stderr,
        }
    }
}

/// One evaluated point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    /// Position in evaluation order, from 0.
    pub index: u64,
    pub sweep: u64,
    /// `χ_center` of the sweep, hex.
    pub center: String,
    /// The evaluated point, hex.
    pub chi: String,
    pub n: usize,
    pub s: usize,
    #[serde(with = "crate::estimator::g_serde")]
    pub g_value: f64,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<SampleStats>,
    /// Digest of the configuration that produced the run.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub config_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl JournalRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    /// The record without wall-clock data.
    pub fn without_timing(&self) -> Self {
        JournalRecord { timing: None, ..self.clone() }
    }
}

/// Appends records, one flushed line each.
pub struct JournalWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl JournalWriter {
    /// Starts a new journal, replacing any existing file.
    pub fn create(path: impl AsRef<Path>) -> Result<Self, SearchError> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path)?;
        Ok(JournalWriter { out: BufWriter::new(file), path })
    }

    /// Continues an existing journal after its first `valid_bytes` bytes,
    /// dropping anything beyond (a torn final line).
    pub fn append(path: impl AsRef<Path>, valid_bytes: u64) -> Result<Self, SearchError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().write(true).open(&path)?;
        file.set_len(valid_bytes)?;
        let mut file = OpenOptions::new().append(true).open(&path)?;
        file.flush()?;
        Ok(JournalWriter { out: BufWriter::new(file), path })
    }

    pub fn write(&mut self, record: &JournalRecord) -> Result<(), SearchError> {
        writeln!(self.out, "{}", record.to_json_line())?;
        self.out.flush()?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JournalContents {
    pub records: Vec<JournalRecord>,
    /// Length of the valid prefix in bytes.
    pub valid_bytes: u64,
    /// Line number of the first unreadable line, when salvaging.
    pub dropped_from_line: Option<usize>,
}

/// Reads a journal. A corrupt line is an error naming its line number,
/// unless `salvage` is set, in which case the valid prefix is kept.
pub fn read_journal(path: impl AsRef<Path>, salvage: bool) -> Result<JournalContents, SearchError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    let mut valid_bytes = 0u64;
    let mut dropped_from_line = None;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        let parsed = if line.ends_with('\n') {
            serde_json::from_str::<JournalRecord>(line.trim_end()).map_err(|e| e.to_string())
        } else {
            Err("truncated line".to_string())
        };
        match parsed {
            Ok(r) if r.index == records.len() as u64 => {
                records.push(r);
                valid_bytes += line.len() as u64;
            }
            Ok(r) => {
                let message = format!("record index {} out of sequence", r.index);
                if !salvage {
                    return Err(SearchError::CorruptJournal { path: path.into(), line: i + 1, message });
                }
                dropped_from_line = Some(i + 1);
                break;
            }
            Err(message) => {
                if !salvage {
                    return Err(SearchError::CorruptJournal { path: path.into(), line: i + 1, message });
                }
                dropped_from_line = Some(i + 1);
                break;
            }
        }
    }
    Ok(JournalContents { records, valid_bytes, dropped_from_line })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(index: u64, g: f64) -> JournalRecord {
        JournalRecord {
            index,
            sweep: 0,
            center: "f".into(),
            chi: "e".into(),
            n: 4,
            s: 3,
            g_value: g,
            stats: None,
            config_sha256: String::new(),
            timing: None,
        }
    }

    #[test]
    fn round_trip_with_and_without_stats() {
        let mut a = rec(0, f64::INFINITY);
        let line = a.to_json_line();
        assert_eq!(serde_json::from_str::<JournalRecord>(&line).unwrap(), a);
        a.stats = Some(SampleStats {
            sample_size: 10,
            seed: 3,
            budget: SolveBudget::conflicts(5),
            successes: 7,
            xi_bar: 0.7,
            stderr: 0.1,
        });
        a.g_value = 12.5;
        let line = a.to_json_line();
        assert!(line.contains("\"N\":10"), "{line}");
        assert_eq!(serde_json::from_str::<JournalRecord>(&line).unwrap(), a);
    }

    #[test]
    fn corrupt_lines_and_salvage() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("j.jsonl");
        let good = format!("{}\n{}\n", rec(0, 1.0).to_json_line(), rec(1, 2.0).to_json_line());
        std::fs::write(&p, format!("{good}{{\"index\": 2, \"ch")).unwrap();
        match read_journal(&p, false) {
            Err(SearchError::CorruptJournal { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let c = read_journal(&p, true).unwrap();
        assert_eq!(c.records.len(), 2);
        assert_eq!(c.valid_bytes, good.len() as u64);
        assert_eq!(c.dropped_from_line, Some(3));

        let mut w = JournalWriter::append(&p, c.valid_bytes).unwrap();
        w.write(&rec(2, 3.0)).unwrap();
        drop(w);
        assert_eq!(read_journal(&p, false).unwrap().records.len(), 3);
    }
}
