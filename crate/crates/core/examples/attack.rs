//! Guess-and-determine attack on Geffe(3,4,5): estimate P for a backdoor,
//! pick how many keystreams to collect, then attack them one by one.
//!
//!     cargo run --release --example attack

use ibsat::attack::{generate_instances, iterated_attack, AttackConfig};
use ibsat::circuit::CipherSpec;
use ibsat::cnf::tseitin_encode;
use ibsat::estimator::{required_outputs, BackdoorSet, Estimator, EstimatorConfig};
use ibsat::sat::SolveBudget;

fn main() {
    let spec = CipherSpec::load(concat!(env!("CARGO_MANIFEST_DIR"), "/ciphers/geffe_3_4_5.toml")).unwrap();
    let circuit = spec.generate().unwrap();
    let formula = tseitin_encode(&circuit);
    let budget = SolveBudget::conflicts(2);
    let b = BackdoorSet::from_indices(12, &[0, 3, 7]);

    let estimate = Estimator::new(&formula, EstimatorConfig { sample_size: 2000, budget, seed: 1, ..Default::default() })
        .unwrap()
        .resistance(&b)
        .unwrap();
    let r = required_outputs(estimate.xi_bar, 0.95).unwrap().exact as usize;
    println!("chi {b}: P_hat = {:.3}, so r = {r} keystreams for 95%", estimate.xi_bar);

    let instances = generate_instances(&circuit, r, 2024);
    let config = AttackConfig { budget, ..Default::default() };
    let report = iterated_attack(&formula, &circuit, &b, &instances, &config).unwrap().with_prediction(estimate.xi_bar);
    for inst in &report.instances {
        println!("  keystream {}: solved = {}", inst.index, inst.solved);
    }
    println!(
        "success = {} after {} guesses (predicted {:.3})",
        report.success,
        report.total_guesses,
        report.prediction.unwrap().predicted_success
    );
    if let Some(key) = report.instances.iter().find_map(|i| i.result.alpha.clone()) {
        let bits: String = key.iter().map(|&v| if v { '1' } else { '0' }).collect();
        println!("recovered key {bits}");
    }
}
