//! Generate a toy cipher from its TOML description and write the CNF with
//! input/output annotations.
//!
//!     cargo run --example encode -- ciphers/toy_spn_8.toml > spn8.cnf

use ibsat::circuit::CipherSpec;
use ibsat::cnf::{tseitin_encode, write_dimacs};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/ciphers/geffe_3_4_5.toml").into());
    let spec = CipherSpec::load(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let circuit = spec.generate().expect("valid spec");
    let formula = tseitin_encode(&circuit);
    eprintln!(
        "{}: n = {}, m = {}, {} gates -> {} vars, {} clauses",
        spec.family_name(),
        circuit.num_inputs(),
        circuit.num_outputs(),
        circuit.gates().len(),
        formula.num_vars(),
        formula.num_clauses()
    );
    print!("{}", write_dimacs(&formula));
}
