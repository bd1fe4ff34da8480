//! Guess-and-determine attacks driven by an inverse backdoor set: guess the
//! bits in `B`, let a budgeted solver finish, verify any key it returns.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::CircuitNetlist;
use crate::cnf::{CnfFormula, Lit};
use crate::estimator::{success_probability, BackdoorSet};
use crate::sat::{SatOracle, SolveBudget, SolveCost, SolveResult, Solver, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("|B| = {s} exceeds the guess cap of 2^{cap_bits}")]
    GuessCap { s: usize, cap_bits: u32 },
    #[error("formula and circuit disagree: {0}")]
    Mismatch(String),
    #[error("output has length {got}, expected {expected}")]
    OutputLength { expected: usize, got: usize },
    #[error("solver returned a model whose key does not produce the observed output")]
    UnsoundModel,
    #[error("an iterated attack needs at least one instance")]
    NoInstances,
    #[error("invalid budget: {0}")]
    Budget(String),
}

/// An observed output `γ`, with the key that produced it when known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackInstance {
    #[serde(with = "bitstring")]
    pub gamma: Vec<bool>,
    #[serde(default, with = "opt_bitstring", skip_serializing_if = "Option::is_none")]
    pub hidden_alpha: Option<Vec<bool>>,
}

/// `r` uniform keys and their outputs.
pub fn generate_instances(circuit: &CircuitNetlist, r: usize, seed: u64) -> Vec<AttackInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..r)
        .map(|_| {
            let alpha: Vec<bool> = (0..circuit.num_inputs()).map(|_| rng.gen()).collect();
            let gamma = circuit.evaluate(&alpha).expect("key has the input width");
            AttackInstance { gamma, hidden_alpha: Some(alpha) }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    /// Per-guess budget `t`.
    pub budget: SolveBudget,
    /// Seeds the order in which guesses are tried.
    pub guess_order_seed: u64,
    /// Refuse backdoors with more than this many bits.
    pub guess_cap_bits: u32,
    pub solver: SolverConfig,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            budget: SolveBudget::conflicts(100),
            guess_order_seed: 0,
            guess_cap_bits: 24,
            solver: SolverConfig::default(),
        }
    }
}

/// A seeded bijection on `0..2^s`: `i ↦ ((a·i + c) mod 2^s) xor m` with `a`
/// odd.
#[derive(Debug, Clone, Copy)]
pub struct GuessOrder {
    bits: u32,
    a: u64,
    c: u64,
    m: u64,
}

impl GuessOrder {
    pub fn new(bits: u32, seed: u64) -> Self {
        assert!(bits < 64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = Self::mask_for(bits);
        GuessOrder { bits, a: (rng.gen::<u64>() | 1) & mask | 1, c: rng.gen::<u64>() & mask, m: rng.gen::<u64>() & mask }
    }

    fn mask_for(bits: u32) -> u64 {
        (1u64 << bits) - 1
    }

    pub fn len(&self) -> u64 {
        1u64 << self.bits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The guess tried at position `i`.
    pub fn at(&self, i: u64) -> u64 {
        let mask = Self::mask_for(self.bits);
        (self.a.wrapping_mul(i).wrapping_add(self.c) & mask) ^ self.m
    }

    /// The position at which `value` is tried.
    pub fn position(&self, value: u64) -> u64 {
        let mask = Self::mask_for(self.bits);
        // inverse of an odd number modulo 2^64 by Newton iteration
        let mut inv = self.a;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(self.a.wrapping_mul(inv)));
        }
        ((value ^ self.m).wrapping_sub(self.c)).wrapping_mul(inv) & mask
    }
}

fn bits_to_value(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (k, &b)| acc | (b as u64) << k)
}

/// Solves each query on a fresh copy of a template solver, so that no
/// learned clause carries over from one guess to the next.
#[derive(Clone)]
pub struct FreshSolverOracle {
    template: Solver,
}

impl FreshSolverOracle {
    pub fn new(formula: &CnfFormula, config: SolverConfig) -> Self {
        FreshSolverOracle { template: Solver::from_shared(Arc::new(formula.clone()), config) }
    }
}

impl SatOracle for FreshSolverOracle {
    fn solve_under(&mut self, assumptions: &[Lit], budget: &SolveBudget) -> SolveResult {
        self.template.clone().solve(assumptions, budget)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementaryResult {
    /// A verified preimage of `γ`.
    #[serde(with = "opt_bitstring")]
    pub alpha: Option<Vec<bool>>,
    pub guesses_tried: u64,
    /// Position of the successful guess in the seeded order.
    pub winning_guess_index: Option<u64>,
    /// Position of `β(α)` for the hidden key, when known.
    pub correct_guess_index: Option<u64>,
    pub cost: SolveCost,
}

impl ElementaryResult {
    pub fn solved(&self) -> bool {
        self.alpha.is_some()
    }
}

fn check_shapes(formula: &CnfFormula, circuit: &CircuitNetlist, backdoor: &BackdoorSet) -> Result<(), AttackError> {
    let roles = formula.roles();
    if roles.inputs.len() != circuit.num_inputs() || roles.outputs.len() != circuit.num_outputs() {
        return Err(AttackError::Mismatch(format!(
            "formula has {}/{} inputs/outputs, circuit {}/{}",
            roles.inputs.len(),
            roles.outputs.len(),
            circuit.num_inputs(),
            circuit.num_outputs()
        )));
    }
    if backdoor.len() != circuit.num_inputs() {
        return Err(AttackError::Mismatch(format!("chi has length {}, expected {}", backdoor.len(), circuit.num_inputs())));
    }
    Ok(())
}

/// Tries every `β ∈ {0,1}^s` in seeded order on `C[γ/Y, β/B]` until one
/// yields a key that maps to `γ`.
pub fn elementary_attack(
    formula: &CnfFormula,
    circuit: &CircuitNetlist,
    backdoor: &BackdoorSet,
    instance: &AttackInstance,
    config: &AttackConfig,
) -> Result<ElementaryResult, AttackError> {
    let mut oracle = FreshSolverOracle::new(formula, config.solver.clone());
    elementary_attack_with(&mut oracle, formula, circuit, backdoor, instance, config)
}

/// [`elementary_attack`] with a caller-supplied oracle.
pub fn elementary_attack_with<O: SatOracle + ?Sized>(
    oracle: &mut O,
    formula: &CnfFormula,
    circuit: &CircuitNetlist,
    backdoor: &BackdoorSet,
    instance: &AttackInstance,
    config: &AttackConfig,
) -> Result<ElementaryResult, AttackError> {
    check_shapes(formula, circuit, backdoor)?;
    config.budget.validate().map_err(|e| AttackError::Budget(e.to_string()))?;
    let gamma = &instance.gamma;
    if gamma.len() != circuit.num_outputs() {
        return Err(AttackError::OutputLength { expected: circuit.num_outputs(), got: gamma.len() });
    }
    let s = backdoor.size();
    if s > config.guess_cap_bits as usize || s >= 63 {
        return Err(AttackError::GuessCap { s, cap_bits: config.guess_cap_bits });
    }
    let roles = formula.roles();
    let b_vars = backdoor.variables(&roles.inputs);
    let order = GuessOrder::new(s as u32, config.guess_order_seed);
    let correct_guess_index =
        instance.hidden_alpha.as_ref().map(|a| order.position(bits_to_value(&backdoor.project(a))));

    let mut assumptions: Vec<Lit> = roles.outputs.iter().zip(gamma).map(|(&v, &b)| Lit::new(v, b)).collect();
    let fixed = assumptions.len();
    let mut cost = SolveCost::default();
    for i in 0..order.len() {
        let beta = order.at(i);
        assumptions.truncate(fixed);
        assumptions.extend(b_vars.iter().enumerate().map(|(k, &v)| Lit::new(v, beta >> k & 1 == 1)));
        let result = oracle.solve_under(&assumptions, &config.budget);
        cost.add(&result.cost);
        if let Some(model) = result.model.filter(|_| result.verdict == crate::sat::Verdict::Sat) {
            let alpha: Vec<bool> = roles.inputs.iter().map(|v| model[v.index()]).collect();
            if circuit.evaluate(&alpha).ok().as_ref() != Some(gamma) {
                return Err(AttackError::UnsoundModel);
            }
            return Ok(ElementaryResult {
                alpha: Some(alpha),
                guesses_tried: i + 1,
                winning_guess_index: Some(i),
                correct_guess_index,
                cost,
            });
        }
    }
    Ok(ElementaryResult { alpha: None, guesses_tried: order.len(), winning_guess_index: None, correct_guess_index, cost })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub index: usize,
    #[serde(flatten)]
    pub instance: AttackInstance,
    pub solved: bool,
    /// Whether the recovered key is the hidden one (another preimage also
    /// counts as success).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches_hidden: Option<bool>,
    #[serde(flatten)]
    pub result: ElementaryResult,
}

/// Success probability predicted from an estimate `P̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub p_hat: f64,
    pub r: usize,
    /// `1 - (1 - P̂)^r`.
    pub predicted_success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub backdoor: BackdoorSet,
    pub s: usize,
    pub budget: SolveBudget,
    pub guess_order_seed: u64,
    /// Attacked instances, up to and including the first success.
    pub instances: Vec<InstanceReport>,
    /// Instances available.
    pub r: usize,
    pub success: bool,
    pub failures: usize,
    pub total_guesses: u64,
    pub total_cost: SolveCost,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<Prediction>,
}

impl AttackReport {
    /// Attaches `1 - (1 - P̂)^r` for comparison with the outcome.
    pub fn with_prediction(mut self, p_hat: f64) -> Self {
        let p = p_hat.clamp(0.0, 1.0);
        self.prediction = Some(Prediction { p_hat: p, r: self.r, predicted_success: success_probability(p, self.r as u64) });
        self
    }
}

/// Attacks `instances` in turn until one succeeds.
pub fn iterated_attack(
    formula: &CnfFormula,
    circuit: &CircuitNetlist,
    backdoor: &BackdoorSet,
    instances: &[AttackInstance],
    config: &AttackConfig,
) -> Result<AttackReport, AttackError> {
    let mut oracle = FreshSolverOracle::new(formula, config.solver.clone());
    iterated_attack_with(&mut oracle, formula, circuit, backdoor, instances, config)
}

pub fn iterated_attack_with<O: SatOracle + ?Sized>(
    oracle: &mut O,
    formula: &CnfFormula,
    circuit: &CircuitNetlist,
    backdoor: &BackdoorSet,
    instances: &[AttackInstance],
    config: &AttackConfig,
) -> Result<AttackReport, AttackError> {
    if instances.is_empty() {
        return Err(AttackError::NoInstances);
    }
    let mut reports = Vec::new();
    let mut total_cost = SolveCost::default();
    let mut total_guesses = 0;
    let mut success = false;
    for (index, instance) in instances.iter().enumerate() {
        let result = elementary_attack_with(oracle, formula, circuit, backdoor, instance, config)?;
        total_cost.add(&result.cost);
        total_guesses += result.guesses_tried;
        let solved = result.solved();
        let matches_hidden = match (&result.alpha, &instance.hidden_alpha) {
            (Some(a), Some(h)) => Some(a == h),
            _ => None,
        };
        reports.push(InstanceReport { index, instance: instance.clone(), solved, matches_hidden, result });
        if solved {
            success = true;
            break;
        }
    }
    Ok(AttackReport {
        backdoor: backdoor.clone(),
        s: backdoor.size(),
        budget: config.budget,
        guess_order_seed: config.guess_order_seed,
        failures: reports.iter().filter(|r| !r.solved).count(),
        instances: reports,
        r: instances.len(),
        success,
        total_guesses,
        total_cost,
        prediction: None,
    })
}

mod bitstring {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        String::deserialize(d)?
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(de::Error::custom(format!("unexpected {c:?} in bit string"))),
            })
            .collect()
    }
}

mod opt_bitstring {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<bool>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(bits) => super::bitstring::serialize(bits, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<bool>>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "super::bitstring")] Vec<bool>);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_netlist;
    use crate::cnf::tseitin_encode;
    use crate::sat::Verdict;

    #[test]
    fn guess_order_is_a_permutation() {
        for bits in [0, 1, 3, 8] {
            let o = GuessOrder::new(bits, 17);
            let mut seen: Vec<u64> = (0..o.len()).map(|i| o.at(i)).collect();
            for i in 0..o.len() {
                assert_eq!(o.position(o.at(i)), i);
            }
            seen.sort();
            assert_eq!(seen, (0..o.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn identity_circuit() {
        let c = parse_netlist("INPUT(x)\nOUTPUT(x)\n").unwrap();
        let f = tseitin_encode(&c);
        let inst = AttackInstance { gamma: vec![true], hidden_alpha: None };
        let r = elementary_attack(&f, &c, &BackdoorSet::full(1), &inst, &AttackConfig::default()).unwrap();
        assert_eq!(r.alpha, Some(vec![true]));
        assert!(r.guesses_tried <= 2);
    }

    struct Refuse;

    impl SatOracle for Refuse {
        fn solve_under(&mut self, _: &[Lit], _: &SolveBudget) -> SolveResult {
            SolveResult { verdict: Verdict::BudgetExceeded, model: None, cost: SolveCost::default() }
        }
    }

    #[test]
    fn failing_oracle_gives_r_failures() {
        let c = parse_netlist("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = XOR(a, b)\n").unwrap();
        let f = tseitin_encode(&c);
        let inst = generate_instances(&c, 3, 1);
        let b = BackdoorSet::full(2);
        let report = iterated_attack_with(&mut Refuse, &f, &c, &b, &inst, &AttackConfig::default()).unwrap();
        assert!(!report.success);
        assert_eq!((report.failures, report.instances.len(), report.total_guesses), (3, 3, 12));
    }

    #[test]
    fn cap_is_enforced() {
        let c = parse_netlist("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n").unwrap();
        let f = tseitin_encode(&c);
        let inst = AttackInstance { gamma: vec![true], hidden_alpha: None };
        let config = AttackConfig { guess_cap_bits: 1, ..AttackConfig::default() };
        assert_eq!(
            elementary_attack(&f, &c, &BackdoorSet::full(2), &inst, &config),
            Err(AttackError::GuessCap { s: 2, cap_bits: 1 })
        );
    }

    #[test]
    fn instances_are_reproducible_and_consistent() {
        let c = parse_netlist("INPUT(a)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(a)\ny = AND(a, b)\n").unwrap();
        let a = generate_instances(&c, 3, 1);
        assert_eq!(a, generate_instances(&c, 3, 1));
        for i in &a {
            assert_eq!(c.evaluate(i.hidden_alpha.as_ref().unwrap()).unwrap(), i.gamma);
        }
        let json = serde_json::to_string(&a[0]).unwrap();
        assert_eq!(serde_json::from_str::<AttackInstance>(&json).unwrap(), a[0]);
    }
}
