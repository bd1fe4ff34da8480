//! Run configuration: a TOML file whose every field can be overridden from
//! the command line. Relative paths in a file are taken relative to the
//! file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::attack::AttackConfig;
use crate::circuit::{load_netlist, CipherSpec, CircuitNetlist};
use crate::cnf::{read_dimacs, tseitin_encode, CnfFormula};
use crate::estimator::{BackdoorSet, EstimatorConfig, SampleMode};
use crate::sat::{SolveBudget, SolverConfig};
use crate::search::SearchConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    /// Input samples for estimation.
    pub sample: u64,
    /// Neighborhood order and jumps.
    pub search: u64,
    /// Attack keys and guess order.
    pub attack: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { sample: 0, search: 0, attack: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub radius: usize,
    pub time_limit_seconds: Option<f64>,
    pub max_evaluations: Option<u64>,
    pub k_escalate: u32,
    /// Start point in any form accepted by [`BackdoorSet::parse`].
    pub initial_chi: Option<String>,
}

impl Default for SearchSection {
    fn default() -> Self {
        let d = SearchConfig::default();
        SearchSection {
            radius: d.radius,
            time_limit_seconds: d.time_limit_seconds,
            max_evaluations: d.max_evaluations,
            k_escalate: d.k_escalate,
            initial_chi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSection {
    /// Number of outputs; derived from `P̂` and `target` when absent.
    pub r: Option<usize>,
    pub target: f64,
    pub guess_cap_bits: u32,
    /// Use this `P̂` instead of re-estimating it.
    pub p_hat: Option<f64>,
}

impl Default for AttackSection {
    fn default() -> Self {
        AttackSection { r: None, target: 0.95, guess_cap_bits: 24, p_hat: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub journal: Option<PathBuf>,
    /// Report or result file of the command.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Cipher spec (TOML); exactly one of `cipher`, `netlist`, `dimacs`.
    pub cipher: Option<PathBuf>,
    pub netlist: Option<PathBuf>,
    /// Annotated DIMACS; no circuit, so not usable for attacks.
    pub dimacs: Option<PathBuf>,
    pub budget: SolveBudget,
    /// `N` during search and estimation.
    pub samples: usize,
    /// `N` when re-estimating `P̂` for an attack.
    pub revalidation_samples: usize,
    pub p_min: f64,
    pub sample_mode: SampleMode,
    pub workers: usize,
    /// Measure conflicts per second and report `G` in seconds too.
    pub calibrate: bool,
    pub seeds: Seeds,
    pub search: SearchSection,
    pub attack: AttackSection,
    pub solver: SolverConfig,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cipher: None,
            netlist: None,
            dimacs: None,
            budget: SolveBudget::conflicts(10),
            samples: 1000,
            revalidation_samples: 10_000,
            p_min: 0.05,
            sample_mode: SampleMode::Shared,
            workers: 1,
            calibrate: true,
            seeds: Seeds::default(),
            search: SearchSection::default(),
            attack: AttackSection::default(),
            solver: SolverConfig::default(),
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Reads a config file, resolving its relative paths against the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::File { path: path.into(), message: e.to_string() })?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| ConfigError::File { path: path.into(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.cipher,
            &mut config.netlist,
            &mut config.dimacs,
            &mut config.output.journal,
            &mut config.output.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let sources = [&self.cipher, &self.netlist, &self.dimacs].iter().filter(|s| s.is_some()).count();
        if sources != 1 {
            return bad(format!("exactly one of cipher, netlist, dimacs must be given ({sources} given)"));
        }
        if let Err(e) = self.estimator_config().validate() {
            return bad(e.to_string());
        }
        if self.revalidation_samples == 0 {
            return bad("revalidation_samples must be at least 1".into());
        }
        if !(self.attack.target > 0.0 && self.attack.target < 1.0) {
            return bad(format!("attack target {} outside (0, 1)", self.attack.target));
        }
        if self.attack.r == Some(0) {
            return bad("attack r must be at least 1".into());
        }
        if let Some(p) = self.attack.p_hat {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("p_hat {p} outside [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            sample_size: self.samples,
            budget: self.budget,
            seed: self.seeds.sample,
            p_min: self.p_min,
            sample_mode: self.sample_mode,
            workers: self.workers,
            solver: self.solver.clone(),
        }
    }

    pub fn search_config(&self, n: usize) -> Result<SearchConfig, ConfigError> {
        let initial_chi = match &self.search.initial_chi {
            Some(text) => Some(BackdoorSet::parse(text, n).map_err(|e| ConfigError::Invalid(e.to_string()))?),
            None => None,
        };
        let config = SearchConfig {
            radius: self.search.radius,
            time_limit_seconds: self.search.time_limit_seconds,
            max_evaluations: self.search.max_evaluations,
            seed: self.seeds.search,
            k_escalate: self.search.k_escalate,
            initial_chi,
        };
        config.validate(n).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(config)
    }

    pub fn attack_config(&self) -> AttackConfig {
        AttackConfig {
            budget: self.budget,
            guess_order_seed: self.seeds.attack,
            guess_cap_bits: self.attack.guess_cap_bits,
            solver: self.solver.clone(),
        }
    }

    /// Digest of everything that determines the sequence of search
    /// evaluations: the function itself, estimator and search settings.
    /// Worker count, limits and output paths are left out.
    pub fn search_fingerprint(&self, source: &Source) -> String {
        let key = serde_json::json!({
            "source_sha256": source.sha256,
            "budget": self.budget,
            "samples": self.samples,
            "p_min": self.p_min,
            "sample_mode": self.sample_mode,
            "seeds": { "sample": self.seeds.sample, "search": self.seeds.search },
            "radius": self.search.radius,
            "k_escalate": self.search.k_escalate,
            "initial_chi": self.search.initial_chi,
            "solver": self.solver,
        });
        hex_sha256(key.to_string().as_bytes())
    }

    /// Loads the function named by the config.
    pub fn load_source(&self) -> Result<Source, ConfigError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|e| ConfigError::File { path: p.into(), message: e.to_string() })
        };
        let file_err = |p: &Path, e: &dyn std::fmt::Display| ConfigError::File { path: p.into(), message: e.to_string() };
        if let Some(p) = &self.cipher {
            let text = read(p)?;
            let spec = CipherSpec::from_toml(&text).map_err(|e| file_err(p, &e))?;
            let circuit = spec.generate().map_err(|e| file_err(p, &e))?;
            let formula = tseitin_encode(&circuit);
            Ok(Source { path: p.clone(), sha256: hex_sha256(text.as_bytes()), circuit: Some(circuit), formula })
        } else if let Some(p) = &self.netlist {
            let text = read(p)?;
            let circuit = load_netlist(p).map_err(|e| file_err(p, &e))?;
            let formula = tseitin_encode(&circuit);
            Ok(Source { path: p.clone(), sha256: hex_sha256(text.as_bytes()), circuit: Some(circuit), formula })
        } else if let Some(p) = &self.dimacs {
            let text = read(p)?;
            let formula = read_dimacs(&text).map_err(|e| file_err(p, &e))?;
            Ok(Source { path: p.clone(), sha256: hex_sha256(text.as_bytes()), circuit: None, formula })
        } else {
            Err(ConfigError::Invalid("no cipher, netlist or dimacs given".into()))
        }
    }
}

/// The function under study.
#[derive(Debug, Clone)]
pub struct Source {
    pub path: PathBuf,
    pub sha256: String,
    /// Absent when read from DIMACS.
    pub circuit: Option<CircuitNetlist>,
    pub formula: CnfFormula,
}

impl Source {
    pub fn num_inputs(&self) -> usize {
        self.formula.roles().inputs.len()
    }
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_defaults() {
        let c = RunConfig::from_toml(
            r#"
cipher = "ciphers/geffe_3_4_5.toml"
samples = 200
budget = { mode = "conflicts", limit = 20 }
[seeds]
search = 4
[search]
max_evaluations = 30
"#,
        )
        .unwrap();
        assert_eq!(c.samples, 200);
        assert_eq!(c.budget, SolveBudget::conflicts(20));
        assert_eq!((c.seeds.search, c.seeds.sample), (4, 0));
        assert_eq!(c.search.radius, 1);
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert!(RunConfig::from_toml("sampels = 3").is_err());
    }

    #[test]
    fn exactly_one_source() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_err());
        c.cipher = Some("a".into());
        c.validate().unwrap();
        c.netlist = Some("b".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, "netlist = \"c.net\"\n[output]\njournal = \"/tmp/j.jsonl\"\n").unwrap();
        let c = RunConfig::load(&p).unwrap();
        assert_eq!(c.netlist.unwrap(), dir.path().join("c.net"));
        assert_eq!(c.output.journal.unwrap(), PathBuf::from("/tmp/j.jsonl"));
    }
}
