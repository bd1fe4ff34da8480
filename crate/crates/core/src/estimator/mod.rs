//! Monte-Carlo estimation of `P_B(t)` and the resistance function `G(B)`,
//! attack success probabilities, and runtime extrapolation for ordinary
//! backdoors.

mod backdoor;
mod formulas;
mod nobs;
pub(crate) mod record;
mod resistance;
mod sampling;

use thiserror::Error;

pub use backdoor::BackdoorSet;
pub use formulas::{extrapolate_total, required_outputs, resistance_value, success_probability, RequiredOutputs};
pub use nobs::{estimate_nobs_runtime, CostMetric, NobsConfig, NobsEstimate};
pub use record::{EstimateRecord, Timing};
pub(crate) use record::g_serde;
pub use resistance::{
    estimate_p, evaluate_sample, resistance, Estimator, EstimatorConfig, ResistanceEstimate, SampleMode,
    SampleOutcome,
};
pub use sampling::{derive_seed, sample_input, sample_inputs};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("invalid chi: {0}")]
    InvalidChi(String),
    #[error("chi has length {got}, expected {expected}")]
    ChiLength { expected: usize, got: usize },
    #[error("input has length {got}, expected {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("probability {0} admits no finite output count")]
    ZeroProbability(f64),
    #[error("target probability {0} outside (0, 1)")]
    InvalidTarget(f64),
    #[error("formula carries no input/output role annotations")]
    MissingRoles,
    #[error("inputs do not determine the outputs by unit propagation")]
    NotForwardDetermined,
    #[error("solver model does not map to a preimage of the observed output")]
    InvalidModel,
    #[error("invalid estimator configuration: {0}")]
    Config(String),
}
