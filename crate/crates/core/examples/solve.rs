//! The CDCL solver on its own: a budgeted call, solving under assumptions,
//! and model enumeration on a small formula.
//!
//!     cargo run --example solve

use ibsat::cnf::{CnfFormula, Lit, Var, VariableRoles};
use ibsat::sat::{enumerate_models, random_k_cnf, SolveBudget, Solver, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // near the 3-SAT threshold
    let f = random_k_cnf(120, 511, 3, &mut rng);
    let mut solver = Solver::new(&f, SolverConfig::default());
    for limit in [10, 100, 1_000_000] {
        let r = solver.solve(&[], &SolveBudget::conflicts(limit));
        println!("t = {limit:>7} conflicts: {:?} after {} conflicts", r.verdict, r.cost.conflicts);
    }

    // x1 -> x2 -> x3, solved with x1 forced on and x3 forced off
    let v = |i| Lit::new(Var(i), true);
    let chain = CnfFormula::new(3, vec![vec![!v(1), v(2)], vec![!v(2), v(3)]], VariableRoles::default()).unwrap();
    let r = Solver::new(&chain, SolverConfig::default()).solve(&[v(1), !v(3)], &SolveBudget::conflicts(10));
    println!("chain under x1, !x3: {:?}", r.verdict);
    for model in enumerate_models(&chain).unwrap() {
        println!("  model {model:?}");
    }
}
