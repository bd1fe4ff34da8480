//! Strong unit-propagation backdoors: sets whose guesses let propagation
//! alone finish the inversion problem for a given output.
//!
//!     cargo run --example supbs

use ibsat::circuit::CipherSpec;
use ibsat::cnf::{tseitin_encode, PartialAssignment};
use ibsat::estimator::BackdoorSet;
use ibsat::sat::verify_supbs_with;

fn main() {
    for name in ["toy_spn_8", "geffe_3_4_5"] {
        let spec = CipherSpec::load(format!("{}/ciphers/{name}.toml", env!("CARGO_MANIFEST_DIR"))).unwrap();
        let circuit = spec.generate().unwrap();
        let formula = tseitin_encode(&circuit);
        let n = circuit.num_inputs();
        let key: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        let gamma = PartialAssignment::from_bits(&formula.roles().outputs, &circuit.evaluate(&key).unwrap());

        for b in [BackdoorSet::full(n), BackdoorSet::from_indices(n, &[0, 1]), BackdoorSet::empty(n)] {
            let report = verify_supbs_with(&formula, &b, &gamma, 1024, 0);
            println!("{name:<12} chi {b}: holds = {:<5} ({} guesses, {:?})", report.holds, report.checked, report.mode);
        }
    }
}
