use super::SatError;
use crate::cnf::CnfFormula;

/// Size guard for [`enumerate_models`].
pub const MAX_ENUMERATION_VARS: u32 = 24;

/// All satisfying complete assignments, in lexicographic order with `false`
/// before `true` and variable 1 most significant. Exhaustive; refuses
/// formulas above [`MAX_ENUMERATION_VARS`] variables.
pub fn enumerate_models(formula: &CnfFormula) -> Result<Vec<Vec<bool>>, SatError> {
    if formula.num_vars() > MAX_ENUMERATION_VARS {
        return Err(SatError::TooLarge { num_vars: formula.num_vars(), limit: MAX_ENUMERATION_VARS });
    }
    enumerate_models_bounded(formula, usize::MAX)
}

/// Exhaustive enumeration without the variable guard, failing once more than
/// `max_models` models exist. Branches are pruned as soon as a clause whose
/// variables are all assigned is falsified, so formulas whose auxiliary
/// variables are functionally determined by a small prefix stay tractable.
pub fn enumerate_models_bounded(formula: &CnfFormula, max_models: usize) -> Result<Vec<Vec<bool>>, SatError> {
    if formula.is_contradiction() {
        return Ok(Vec::new());
    }
    let n = formula.num_vars() as usize;
    // clauses that become fully assigned when variable index `i` is set
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, clause) in formula.clauses().iter().enumerate() {
        let last = clause.iter().map(|l| l.var().index()).max().expect("clauses are non-empty");
        closing[last].push(ci);
    }
    let clauses = formula.clauses();
    let mut models = Vec::new();
    let mut assignment = vec![false; n];

    // iterative DFS; `choice[i]` counts values tried for variable i
    let mut choice = vec![0u8; n + 1];
    let mut depth = 0usize;
    loop {
        if depth == n {
            if models.len() == max_models {
                return Err(SatError::TooManyModels(max_models));
            }
            models.push(assignment.clone());
            if n == 0 {
                return Ok(models);
            }
            depth -= 1;
            continue;
        }
        if choice[depth] == 2 {
            choice[depth] = 0;
            if depth == 0 {
                return Ok(models);
            }
            depth -= 1;
            continue;
        }
        assignment[depth] = choice[depth] == 1;
        choice[depth] += 1;
        let ok = closing[depth]
            .iter()
            .all(|&ci| clauses[ci].iter().any(|l| assignment[l.var().index()] == l.is_positive()));
        if ok {
            depth += 1;
        }
    }
}
