//! Budgeted SAT oracle: a standalone unit propagator, a CDCL solver with
//! assumptions and conflict/wall-clock budgets, a brute-force model
//! enumerator, and the strong unit-propagation backdoor check.

mod calibrate;
mod cdcl;
mod enumerate;
mod propagate;
mod supbs;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{CnfFormula, Lit, PartialAssignment};

pub use calibrate::{calibrate_conflicts_per_second, random_k_cnf, Calibration};
pub use cdcl::{Solver, SolverConfig};
pub use enumerate::{enumerate_models, enumerate_models_bounded, MAX_ENUMERATION_VARS};
pub use propagate::{unit_propagate, Conflict, Propagator};
pub use supbs::{verify_supbs, verify_supbs_with, SupbsMode, SupbsReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("formula has {num_vars} variables; enumeration is limited to {limit}")]
    TooLarge { num_vars: u32, limit: u32 },
    #[error("model enumeration exceeded {0} models")]
    TooManyModels(usize),
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    Conflicts,
    WallSeconds,
}

/// The per-call resource limit `t`. In conflict mode the solver may perform
/// at most `floor(limit)` conflicts; in wall-clock mode it must finish within
/// `limit` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveBudget {
    pub mode: BudgetMode,
    pub limit: f64,
}

impl SolveBudget {
    pub fn conflicts(limit: u64) -> Self {
        SolveBudget { mode: BudgetMode::Conflicts, limit: limit as f64 }
    }

    pub fn seconds(limit: f64) -> Self {
        SolveBudget { mode: BudgetMode::WallSeconds, limit }
    }

    pub fn validate(&self) -> Result<(), SatError> {
        if self.limit.is_finite() && self.limit > 0.0 {
            Ok(())
        } else {
            Err(SatError::InvalidBudget(format!("limit must be positive and finite, got {}", self.limit)))
        }
    }

    /// Conflicts allowed (conflict mode) or `u64::MAX`.
    pub(crate) fn max_conflicts(&self) -> u64 {
        match self.mode {
            BudgetMode::Conflicts => self.limit.floor() as u64,
            BudgetMode::WallSeconds => u64::MAX,
        }
    }

    pub fn unit(&self) -> &'static str {
        match self.mode {
            BudgetMode::Conflicts => "conflicts",
            BudgetMode::WallSeconds => "s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Sat,
    Unsat,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveCost {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub wall_seconds: f64,
}

impl SolveCost {
    pub fn add(&mut self, other: &SolveCost) {
        self.conflicts += other.conflicts;
        self.decisions += other.decisions;
        self.propagations += other.propagations;
        self.wall_seconds += other.wall_seconds;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub verdict: Verdict,
    /// Complete assignment, `model[i]` for variable `i + 1`; present iff SAT.
    pub model: Option<Vec<bool>>,
    pub cost: SolveCost,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        self.verdict == Verdict::Sat
    }

    /// Whether the formula was decided (SAT or UNSAT) within budget.
    pub fn is_decided(&self) -> bool {
        self.verdict != Verdict::BudgetExceeded
    }
}

/// Anything that can answer budgeted SAT queries under assumptions.
pub trait SatOracle {
    fn solve_under(&mut self, assumptions: &[Lit], budget: &SolveBudget) -> SolveResult;
}

/// Solves `formula` under `assumptions` with the default solver
/// configuration.
pub fn solve(formula: &CnfFormula, assumptions: &PartialAssignment, budget: &SolveBudget) -> SolveResult {
    Solver::new(formula, SolverConfig::default()).solve(&assumptions.to_lits(), budget)
}

/// Independent clause checker for complete assignments.
pub fn check_model(formula: &CnfFormula, model: &[bool], assumptions: &[Lit]) -> bool {
    model.len() == formula.num_vars() as usize
        && formula.is_satisfied_by(model)
        && assumptions.iter().all(|l| model[l.var().index()] == l.is_positive())
}
