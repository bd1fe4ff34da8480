use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::formulas::resistance_value;
use super::sampling::{derive_seed, sample_input};
use super::{BackdoorSet, EstimatorError};
use crate::cnf::{CnfFormula, Lit, Var};
use crate::sat::{Propagator, SolveBudget, SolveCost, Solver, SolverConfig, Verdict};

/// Whether every evaluated point reuses the same input sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Common random numbers: one sample per run, shared by all points.
    #[default]
    Shared,
    /// A fresh sample per point, seeded from the run seed and `χ`.
    FreshPerPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub sample_size: usize,
    pub budget: SolveBudget,
    pub seed: u64,
    /// Points with `ξ̄ < p_min` get `G = +∞`.
    pub p_min: f64,
    pub sample_mode: SampleMode,
    pub workers: usize,
    pub solver: SolverConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            sample_size: 1000,
            budget: SolveBudget::conflicts(100),
            seed: 0,
            p_min: 0.05,
            sample_mode: SampleMode::Shared,
            workers: 1,
            solver: SolverConfig::default(),
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.sample_size == 0 {
            return Err(EstimatorError::Config("sample size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p_min) {
            return Err(EstimatorError::Config(format!("p_min {} outside [0, 1]", self.p_min)));
        }
        if self.workers == 0 {
            return Err(EstimatorError::Config("worker count must be at least 1".into()));
        }
        self.budget.validate().map_err(|e| EstimatorError::Config(e.to_string()))
    }
}

/// One observation `ξ^j` with its input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub alpha: Vec<bool>,
    /// `ξ^j`: the subproblem was solved within budget.
    pub solved: bool,
    pub verdict: Verdict,
    pub cost: SolveCost,
}

/// The value of the resistance function at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceEstimate {
    pub backdoor: BackdoorSet,
    pub budget: SolveBudget,
    pub sample_size: usize,
    pub successes: usize,
    /// `ξ̄ = successes / N`.
    pub xi_bar: f64,
    /// `G(B)` in budget units; `+∞` when `ξ̄ = 0` or `ξ̄ < p_min`.
    pub g_value: f64,
    /// `sqrt(ξ̄ (1 - ξ̄) / N)`.
    pub stderr: f64,
    pub p_min: f64,
    /// Seed of the input sample actually used.
    pub seed: u64,
    pub cost: SolveCost,
    pub wall_seconds: f64,
}

impl ResistanceEstimate {
    pub fn from_counts(
        backdoor: BackdoorSet,
        budget: SolveBudget,
        sample_size: usize,
        successes: usize,
        p_min: f64,
        seed: u64,
    ) -> Self {
        let xi_bar = successes as f64 / sample_size as f64;
        let s = backdoor.size();
        let g_value = if xi_bar < p_min { f64::INFINITY } else { resistance_value(s, budget.limit, xi_bar) };
        ResistanceEstimate {
            backdoor,
            budget,
            sample_size,
            successes,
            xi_bar,
            g_value,
            stderr: (xi_bar * (1.0 - xi_bar) / sample_size as f64).sqrt(),
            p_min,
            seed,
            cost: SolveCost::default(),
            wall_seconds: 0.0,
        }
    }

    pub fn s(&self) -> usize {
        self.backdoor.size()
    }
}

/// Monte-Carlo estimator of `P_B(t)` and `G(B)` for one encoded function.
///
/// Inputs are mapped to outputs by unit propagation over the formula, so a
/// DIMACS file with role annotations is all that is needed.
pub struct Estimator<'a> {
    formula: &'a CnfFormula,
    propagator: Propagator<'a>,
    template: Solver,
    config: EstimatorConfig,
    pool: rayon::ThreadPool,
}

impl<'a> Estimator<'a> {
    pub fn new(formula: &'a CnfFormula, config: EstimatorConfig) -> Result<Self, EstimatorError> {
        config.validate()?;
        if formula.roles().inputs.is_empty() || formula.roles().outputs.is_empty() {
            return Err(EstimatorError::MissingRoles);
        }
        let template = Solver::from_shared(Arc::new(formula.clone()), config.solver.clone());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| EstimatorError::Config(e.to_string()))?;
        Ok(Estimator { formula, propagator: Propagator::new(formula), template, config, pool })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn formula(&self) -> &'a CnfFormula {
        self.formula
    }

    pub fn num_inputs(&self) -> usize {
        self.formula.roles().inputs.len()
    }

    /// `f(α)` by propagating `α` through the encoding.
    pub fn outputs_of(&self, alpha: &[bool]) -> Result<Vec<bool>, EstimatorError> {
        let roles = self.formula.roles();
        if alpha.len() != roles.inputs.len() {
            return Err(EstimatorError::InputLength { expected: roles.inputs.len(), got: alpha.len() });
        }
        let lits: Vec<Lit> = roles.inputs.iter().zip(alpha).map(|(&v, &b)| Lit::new(v, b)).collect();
        let values = self.propagator.propagate(&lits).map_err(|_| EstimatorError::NotForwardDetermined)?;
        roles
            .outputs
            .iter()
            .map(|v| values[v.index()])
            .collect::<Option<Vec<bool>>>()
            .ok_or(EstimatorError::NotForwardDetermined)
    }

    /// Solves `C[f(α)/Y, β(α)/B]` once under the configured budget.
    pub fn evaluate_sample(&self, backdoor: &BackdoorSet, alpha: &[bool]) -> Result<SampleOutcome, EstimatorError> {
        let mut solver = self.template.clone();
        self.evaluate_sample_in(&mut solver, backdoor, alpha)
    }

    /// As [`Estimator::evaluate_sample`], with `solver` as scratch space.
    fn evaluate_sample_in(
        &self,
        solver: &mut Solver,
        backdoor: &BackdoorSet,
        alpha: &[bool],
    ) -> Result<SampleOutcome, EstimatorError> {
        let roles = self.formula.roles();
        if backdoor.len() != roles.inputs.len() {
            return Err(EstimatorError::ChiLength { expected: roles.inputs.len(), got: backdoor.len() });
        }
        let gamma = self.outputs_of(alpha)?;
        let mut assumptions: Vec<Lit> =
            roles.outputs.iter().zip(&gamma).map(|(&v, &b)| Lit::new(v, b)).collect();
        assumptions.extend(backdoor.indices().map(|i| Lit::new(roles.inputs[i], alpha[i])));

        solver.reset_from(&self.template);
        let result = solver.solve(&assumptions, &self.config.budget);
        if let Some(model) = &result.model {
            let preimage: Vec<bool> = roles.inputs.iter().map(|v: &Var| model[v.index()]).collect();
            if self.outputs_of(&preimage)? != gamma {
                return Err(EstimatorError::InvalidModel);
            }
        }
        Ok(SampleOutcome {
            alpha: alpha.to_vec(),
            solved: result.is_sat(),
            verdict: result.verdict,
            cost: result.cost,
        })
    }

    /// Seed of the input sample for `backdoor` under the configured mode.
    pub fn sample_seed(&self, backdoor: &BackdoorSet) -> u64 {
        match self.config.sample_mode {
            SampleMode::Shared => self.config.seed,
            SampleMode::FreshPerPoint => derive_seed(self.config.seed, &backdoor.to_hex()),
        }
    }

    /// All `N` observations for `backdoor`, in sample order regardless of
    /// scheduling.
    pub fn sample_outcomes(&self, backdoor: &BackdoorSet, seed: u64) -> Result<Vec<SampleOutcome>, EstimatorError> {
        let n = self.num_inputs();
        self.pool.install(|| {
            (0..self.config.sample_size as u64)
                .into_par_iter()
                .map_init(|| self.template.clone(), |solver, j| {
                    self.evaluate_sample_in(solver, backdoor, &sample_input(n, seed, j))
                })
                .collect()
        })
    }

    /// `ξ̄` and `G(B)` for `backdoor`.
    pub fn resistance(&self, backdoor: &BackdoorSet) -> Result<ResistanceEstimate, EstimatorError> {
        self.resistance_with_seed(backdoor, self.sample_seed(backdoor))
    }

    pub fn resistance_with_seed(&self, backdoor: &BackdoorSet, seed: u64) -> Result<ResistanceEstimate, EstimatorError> {
        let start = Instant::now();
        let outcomes = self.sample_outcomes(backdoor, seed)?;
        let successes = outcomes.iter().filter(|o| o.solved).count();
        let mut est = ResistanceEstimate::from_counts(
            backdoor.clone(),
            self.config.budget,
            outcomes.len(),
            successes,
            self.config.p_min,
            seed,
        );
        for o in &outcomes {
            est.cost.add(&o.cost);
        }
        est.wall_seconds = start.elapsed().as_secs_f64();
        Ok(est)
    }
}

/// `ξ^j` for one input under `budget` with the default solver.
pub fn evaluate_sample(
    formula: &CnfFormula,
    backdoor: &BackdoorSet,
    alpha: &[bool],
    budget: SolveBudget,
) -> Result<SampleOutcome, EstimatorError> {
    let config = EstimatorConfig { budget, sample_size: 1, ..EstimatorConfig::default() };
    Estimator::new(formula, config)?.evaluate_sample(backdoor, alpha)
}

/// `ξ̄` over `sample_size` inputs drawn with `seed`, without the `p_min` floor.
pub fn estimate_p(
    formula: &CnfFormula,
    backdoor: &BackdoorSet,
    budget: SolveBudget,
    sample_size: usize,
    seed: u64,
) -> Result<ResistanceEstimate, EstimatorError> {
    let config = EstimatorConfig { budget, sample_size, seed, p_min: 0.0, ..EstimatorConfig::default() };
    Estimator::new(formula, config)?.resistance(backdoor)
}

/// `G(B)` with the default `p_min` floor.
pub fn resistance(
    formula: &CnfFormula,
    backdoor: &BackdoorSet,
    budget: SolveBudget,
    sample_size: usize,
    seed: u64,
) -> Result<ResistanceEstimate, EstimatorError> {
    let config = EstimatorConfig { budget, sample_size, seed, ..EstimatorConfig::default() };
    Estimator::new(formula, config)?.resistance(backdoor)
}
