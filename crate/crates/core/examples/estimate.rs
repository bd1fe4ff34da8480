//! Score a few backdoor sets of Geffe(3,4,5) with the resistance function.
//! Guessing more bits makes each subproblem easy but multiplies the number
//! of guesses; the interesting sets sit in between.
//!
//!     cargo run --release --example estimate

use ibsat::circuit::CipherSpec;
use ibsat::cnf::tseitin_encode;
use ibsat::estimator::{BackdoorSet, Estimator, EstimatorConfig};
use ibsat::sat::SolveBudget;

fn main() {
    let spec = CipherSpec::load(concat!(env!("CARGO_MANIFEST_DIR"), "/ciphers/geffe_3_4_5.toml")).unwrap();
    let formula = tseitin_encode(&spec.generate().unwrap());
    let n = formula.roles().inputs.len();
    let config = EstimatorConfig { sample_size: 1000, budget: SolveBudget::conflicts(2), seed: 1, ..Default::default() };
    let estimator = Estimator::new(&formula, config).unwrap();

    let candidates = [
        ("all key bits", BackdoorSet::full(n)),
        ("first register", BackdoorSet::from_indices(n, &[0, 1, 2])),
        ("one bit per register", BackdoorSet::from_indices(n, &[0, 3, 7])),
        ("nothing", BackdoorSet::empty(n)),
    ];
    println!("{:<22} {:<14} {:>3} {:>7} {:>12}", "set", "chi", "s", "xi_bar", "G");
    for (label, b) in candidates {
        let est = estimator.resistance(&b).unwrap();
        println!("{label:<22} {b:<14} {:>3} {:>7.3} {:>12.1}", est.s(), est.xi_bar, est.g_value);
    }
}
