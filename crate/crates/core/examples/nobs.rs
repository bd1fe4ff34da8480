//! Runtime of solving a formula by sweeping every assignment of a chosen
//! variable set, extrapolated from a random sample of subproblems.
//!
//!     cargo run --release --example nobs

use ibsat::circuit::CipherSpec;
use ibsat::cnf::{tseitin_encode, PartialAssignment};
use ibsat::estimator::{estimate_nobs_runtime, BackdoorSet, CostMetric, NobsConfig};

fn main() {
    let spec = CipherSpec::load(concat!(env!("CARGO_MANIFEST_DIR"), "/ciphers/geffe_7_8_9.toml")).unwrap();
    let circuit = spec.generate().unwrap();
    let formula = tseitin_encode(&circuit);
    let n = circuit.num_inputs();

    // fix one keystream so the subproblems are inversion problems
    let key: Vec<bool> = (0..n).map(|i| i % 2 == 1).collect();
    let gamma = PartialAssignment::from_bits(&formula.roles().outputs, &circuit.evaluate(&key).unwrap());
    let instance = formula.substitute(&gamma);

    let config = NobsConfig { sample_size: 200, seed: 3, metric: CostMetric::Conflicts, ..Default::default() };
    for indices in [vec![0, 1, 2, 3, 4, 5, 6], vec![0, 7, 15], vec![]] {
        let vars = BackdoorSet::from_indices(n, &indices).variables(&formula.roles().inputs);
        let est = estimate_nobs_runtime(&instance, &vars, &config).unwrap();
        println!(
            "|B| = {:>2}: mean {:>8.2} conflicts per subproblem, total {:>10.1} +- {:.1}",
            est.backdoor_size, est.mean, est.total, est.total_stderr
        );
    }
}
