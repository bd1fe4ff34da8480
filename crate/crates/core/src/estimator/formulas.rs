use serde::{Deserialize, Serialize};

use super::EstimatorError;

/// Success probability of the iterated attack over `r` independent outputs,
/// `1 - (1 - p)^r`.
pub fn success_probability(p: f64, r: u64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
    assert!(r >= 1, "at least one output is required");
    if p == 1.0 {
        return 1.0;
    }
    -((r as f64) * (-p).ln_1p()).exp_m1()
}

/// Resistance `G = 2^s · t · 3 / ξ̄`; `+∞` when `ξ̄ = 0`.
pub fn resistance_value(s: usize, t: f64, xi_bar: f64) -> f64 {
    if xi_bar <= 0.0 {
        return f64::INFINITY;
    }
    (s as f64).exp2() * t * 3.0 / xi_bar
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredOutputs {
    /// Smallest `r` with `1 - (1 - p)^r >= target`.
    pub exact: u64,
    /// `ceil(3 / p)`, the rule of thumb behind the factor 3 in `G`.
    pub approximate: u64,
}

/// Number of outputs needed to reach `target` success probability.
pub fn required_outputs(p: f64, target: f64) -> Result<RequiredOutputs, EstimatorError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(EstimatorError::ZeroProbability(p));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(EstimatorError::InvalidTarget(target));
    }
    let approximate = (3.0 / p).ceil() as u64;
    if p == 1.0 {
        return Ok(RequiredOutputs { exact: 1, approximate });
    }
    let mut r = ((-target).ln_1p() / (-p).ln_1p()).ceil().max(1.0) as u64;
    // floating error near integer ratios can land one step off either way
    while r > 1 && success_probability(p, r - 1) >= target {
        r -= 1;
    }
    while success_probability(p, r) < target {
        r += 1;
    }
    Ok(RequiredOutputs { exact: r, approximate })
}

/// Mean cost times `2^|B|`.
pub fn extrapolate_total(observations: &[f64], backdoor_size: usize) -> f64 {
    assert!(!observations.is_empty(), "no observations");
    let mean = observations.iter().sum::<f64>() / observations.len() as f64;
    mean * (backdoor_size as f64).exp2()
}
