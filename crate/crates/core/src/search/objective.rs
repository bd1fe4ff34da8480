use std::time::{SystemTime, UNIX_EPOCH};

use super::journal::SampleStats;
use super::SearchError;
use crate::estimator::{BackdoorSet, Estimator, Timing};
use crate::sat::Calibration;

/// The value of the objective at one point, with optional detail for the
/// journal.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub g_value: f64,
    pub stats: Option<SampleStats>,
    pub timing: Option<Timing>,
}

impl Evaluation {
    pub fn value(g_value: f64) -> Self {
        Evaluation { g_value, stats: None, timing: None }
    }
}

/// A black-box function on `{0,1}^n` to be minimized.
pub trait Objective {
    fn evaluate(&mut self, chi: &BackdoorSet) -> Result<Evaluation, SearchError>;
}

/// Wraps a plain function `χ ↦ G(χ)`.
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&BackdoorSet) -> f64> Objective for FnObjective<F> {
    fn evaluate(&mut self, chi: &BackdoorSet) -> Result<Evaluation, SearchError> {
        Ok(Evaluation::value((self.0)(chi)))
    }
}

/// The estimated resistance function.
pub struct ResistanceObjective<'a> {
    estimator: Estimator<'a>,
    calibration: Option<Calibration>,
}

impl<'a> ResistanceObjective<'a> {
    pub fn new(estimator: Estimator<'a>) -> Self {
        ResistanceObjective { estimator, calibration: None }
    }

    /// Stamps `G` in seconds into the journal timing data.
    pub fn with_calibration(mut self, calibration: Calibration) -> Self {
        self.calibration = Some(calibration);
        self
    }

    pub fn estimator(&self) -> &Estimator<'a> {
        &self.estimator
    }
}

impl Objective for ResistanceObjective<'_> {
    fn evaluate(&mut self, chi: &BackdoorSet) -> Result<Evaluation, SearchError> {
        let est = self.estimator.resistance(chi).map_err(|e| SearchError::Objective(e.to_string()))?;
        let g_seconds = match (&self.calibration, est.budget.mode) {
            (Some(c), crate::sat::BudgetMode::Conflicts) => Some(c.to_seconds(est.g_value)),
            (_, crate::sat::BudgetMode::WallSeconds) => Some(est.g_value),
            _ => None,
        };
        Ok(Evaluation {
            g_value: est.g_value,
            stats: Some(SampleStats::from_estimate(&est)),
            timing: Some(Timing {
                wall_seconds: est.wall_seconds,
                timestamp: now(),
                g_seconds,
                conflicts_per_second: self.calibration.as_ref().map(|c| c.conflicts_per_second),
            }),
        })
    }
}

pub(crate) fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}
