use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Solver, SolverConfig, SolveBudget};
use crate::cnf::{CnfFormula, Lit, Var, VariableRoles};

/// Measured solver throughput used to express conflict budgets in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub conflicts_per_second: f64,
    pub conflicts: u64,
    pub seconds: f64,
}

impl Calibration {
    pub fn to_seconds(&self, conflicts: f64) -> f64 {
        conflicts / self.conflicts_per_second
    }
}

/// Uniform random k-CNF with distinct variables per clause.
pub fn random_k_cnf(num_vars: u32, num_clauses: usize, k: usize, rng: &mut impl Rng) -> CnfFormula {
    assert!(k as u32 <= num_vars, "clause width exceeds variable count");
    let clauses = (0..num_clauses)
        .map(|_| {
            sample(rng, num_vars as usize, k)
                .into_iter()
                .map(|i| Lit::new(Var::from_index(i), rng.gen()))
                .collect()
        })
        .collect();
    CnfFormula::new(num_vars, clauses, VariableRoles::default()).expect("random clauses are well formed")
}

/// Solves a fixed family of hard random 3-CNFs (200 variables at the
/// threshold ratio) until at least `min_conflicts` conflicts were spent.
pub fn calibrate_conflicts_per_second(min_conflicts: u64) -> Calibration {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1b5);
    let mut conflicts = 0;
    let mut seconds = 0.0;
    while conflicts < min_conflicts.max(1) {
        let f = random_k_cnf(200, 852, 3, &mut rng);
        let r = Solver::new(&f, SolverConfig::default()).solve(&[], &SolveBudget::conflicts(min_conflicts));
        conflicts += r.cost.conflicts;
        seconds += r.cost.wall_seconds;
    }
    Calibration { conflicts_per_second: conflicts as f64 / seconds.max(1e-9), conflicts, seconds }
}
