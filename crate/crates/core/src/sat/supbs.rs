use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::propagate::Propagator;
use crate::cnf::{CnfFormula, Lit, PartialAssignment};
use crate::estimator::BackdoorSet;

/// How the guesses `β` were covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SupbsMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupbsReport {
    pub holds: bool,
    pub mode: SupbsMode,
    pub checked: u64,
    /// A guess on which propagation left variables open, if any.
    pub counterexample: Option<Vec<bool>>,
}

/// Backdoors up to this size are checked exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Checks that unit propagation decides `C[γ/Y, β/B]` for every guess `β`
/// (all `2^|B|` when `|B| <= 16`, otherwise 1024 seeded samples).
pub fn verify_supbs(formula: &CnfFormula, backdoor: &BackdoorSet, outputs: &PartialAssignment) -> bool {
    verify_supbs_with(formula, backdoor, outputs, 1024, 0).holds
}

pub fn verify_supbs_with(
    formula: &CnfFormula,
    backdoor: &BackdoorSet,
    outputs: &PartialAssignment,
    samples: u64,
    seed: u64,
) -> SupbsReport {
    let vars = backdoor.variables(&formula.roles().inputs);
    let propagator = Propagator::new(formula);
    let base: Vec<Lit> = outputs.to_lits();
    let s = vars.len();

    let decides = |beta: &[bool]| -> bool {
        let mut assumptions = base.clone();
        assumptions.extend(vars.iter().zip(beta).map(|(&v, &b)| Lit::new(v, b)));
        match propagator.propagate(&assumptions) {
            Err(_) => true,
            Ok(values) => values.iter().all(Option::is_some),
        }
    };

    let mut checked = 0u64;
    let mut counterexample = None;
    let mode = if s <= EXHAUSTIVE_LIMIT {
        for code in 0..(1u64 << s) {
            let beta: Vec<bool> = (0..s).map(|i| (code >> i) & 1 == 1).collect();
            checked += 1;
            if !decides(&beta) {
                counterexample = Some(beta);
                break;
            }
        }
        SupbsMode::Exhaustive
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let beta: Vec<bool> = (0..s).map(|_| rng.gen()).collect();
            checked += 1;
            if !decides(&beta) {
                counterexample = Some(beta);
                break;
            }
        }
        SupbsMode::Sampled { samples, seed }
    };
    SupbsReport { holds: counterexample.is_none(), mode, checked, counterexample }
}
