use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::formulas::extrapolate_total;
use super::EstimatorError;
use crate::cnf::{CnfFormula, Lit, Var};
use crate::sat::{SolveBudget, Solver, SolverConfig};

/// What a subproblem costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMetric {
    #[default]
    WallSeconds,
    Conflicts,
    Propagations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NobsConfig {
    pub sample_size: usize,
    pub seed: u64,
    /// Per-subproblem budget; large so that subproblems are decided.
    pub budget: SolveBudget,
    pub metric: CostMetric,
    pub solver: SolverConfig,
}

impl Default for NobsConfig {
    fn default() -> Self {
        NobsConfig {
            sample_size: 100,
            seed: 0,
            budget: SolveBudget::conflicts(1 << 40),
            metric: CostMetric::WallSeconds,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NobsEstimate {
    pub backdoor_size: usize,
    pub metric: CostMetric,
    pub observations: Vec<f64>,
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    /// `mean · 2^|B|`.
    pub total: f64,
    /// `stderr · 2^|B|`.
    pub total_stderr: f64,
    /// Subproblems not decided within the budget.
    pub undecided: usize,
}

/// Extrapolated cost of solving `formula` by sweeping all assignments of
/// `vars`: the mean cost of `C[β/B]` over uniform `β`, times `2^|B|`.
pub fn estimate_nobs_runtime(
    formula: &CnfFormula,
    vars: &[Var],
    config: &NobsConfig,
) -> Result<NobsEstimate, EstimatorError> {
    if config.sample_size == 0 {
        return Err(EstimatorError::Config("sample size must be at least 1".into()));
    }
    config.budget.validate().map_err(|e| EstimatorError::Config(e.to_string()))?;
    if let Some(v) = vars.iter().find(|v| v.0 == 0 || v.0 > formula.num_vars()) {
        return Err(EstimatorError::InvalidChi(format!("variable {} not in formula", v.0)));
    }
    let template = Solver::new(formula, config.solver.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut observations = Vec::with_capacity(config.sample_size);
    let mut undecided = 0;
    for _ in 0..config.sample_size {
        let assumptions: Vec<Lit> = vars.iter().map(|&v| Lit::new(v, rng.gen())).collect();
        let start = Instant::now();
        let result = template.clone().solve(&assumptions, &config.budget);
        let secs = start.elapsed().as_secs_f64();
        if !result.is_decided() {
            undecided += 1;
        }
        observations.push(match config.metric {
            CostMetric::WallSeconds => secs,
            CostMetric::Conflicts => result.cost.conflicts as f64,
            CostMetric::Propagations => result.cost.propagations as f64,
        });
    }
    let k = observations.len() as f64;
    let mean = observations.iter().sum::<f64>() / k;
    let var = if observations.len() > 1 {
        observations.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let stderr = (var / k).sqrt();
    let scale = (vars.len() as f64).exp2();
    Ok(NobsEstimate {
        backdoor_size: vars.len(),
        metric: config.metric,
        total: extrapolate_total(&observations, vars.len()),
        total_stderr: stderr * scale,
        mean,
        stderr,
        observations,
        undecided,
    })
}
