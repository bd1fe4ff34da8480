use serde::{Deserialize, Serialize};

use super::ResistanceEstimate;
use crate::sat::SolveBudget;

/// Wall-clock data, kept apart so that records compare equal across runs
/// once it is dropped.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
    /// Seconds since the Unix epoch.
    pub timestamp: f64,
    /// `G` converted to seconds with the calibration constant, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conflicts_per_second: Option<f64>,
}

/// One evaluated point as a JSONL record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub chi: String,
    pub n: usize,
    pub s: usize,
    #[serde(rename = "N")]
    pub sample_size: usize,
    pub seed: u64,
    pub budget: SolveBudget,
    pub successes: usize,
    pub xi_bar: f64,
    #[serde(with = "g_serde")]
    pub g_value: f64,
    pub stderr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl EstimateRecord {
    pub fn from_estimate(est: &ResistanceEstimate) -> Self {
        EstimateRecord {
            chi: est.backdoor.to_hex(),
            n: est.backdoor.len(),
            s: est.s(),
            sample_size: est.sample_size,
            seed: est.seed,
            budget: est.budget,
            successes: est.successes,
            xi_bar: est.xi_bar,
            g_value: est.g_value,
            stderr: est.stderr,
            timing: None,
        }
    }

    pub fn with_timing(mut self, timing: Timing) -> Self {
        self.timing = Some(timing);
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Serializes `+∞` as the string `"inf"`.
pub(crate) mod g_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum G {
            Num(f64),
            Str(String),
        }
        match G::deserialize(d)? {
            G::Num(v) => Ok(v),
            G::Str(s) if s == "inf" => Ok(f64::INFINITY),
            G::Str(s) => Err(de::Error::custom(format!("unexpected g_value {s:?}"))),
        }
    }
}
