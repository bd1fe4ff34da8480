//! Tabu search for a good backdoor of Geffe(3,4,5), journaled to disk, then
//! extended by resuming from the journal.
//!
//!     cargo run --release --example minimize

use ibsat::circuit::CipherSpec;
use ibsat::cnf::tseitin_encode;
use ibsat::estimator::{Estimator, EstimatorConfig};
use ibsat::sat::SolveBudget;
use ibsat::search::{tabu_minimize, ResistanceObjective, RunOptions, SearchConfig};

fn main() {
    let spec = CipherSpec::load(concat!(env!("CARGO_MANIFEST_DIR"), "/ciphers/geffe_3_4_5.toml")).unwrap();
    let formula = tseitin_encode(&spec.generate().unwrap());
    let n = formula.roles().inputs.len();
    let estimator = Estimator::new(
        &formula,
        EstimatorConfig { sample_size: 300, budget: SolveBudget::conflicts(2), seed: 5, ..Default::default() },
    )
    .unwrap();
    let mut objective = ResistanceObjective::new(estimator);

    let dir = scratch_dir();
    let journal = dir.join("search.jsonl");
    let _ = std::fs::remove_file(&journal);

    let mut config = SearchConfig { max_evaluations: Some(40), time_limit_seconds: None, seed: 11, ..Default::default() };
    let options = |resume| RunOptions { journal: Some(&journal), resume, ..Default::default() };
    let first = tabu_minimize(&mut objective, n, &config, options(false)).unwrap();
    println!("after {:>3} points: best {} with G = {:.1}", first.evaluations(), first.best, first.g_best);

    // pick up where the journal stops
    config.max_evaluations = Some(150);
    let more = tabu_minimize(&mut objective, n, &config, options(true)).unwrap();
    println!("after {:>3} points: best {} with G = {:.1} ({:?})", more.evaluations(), more.best, more.g_best, more.termination);
    println!("start point 1^{n} scored G = {:.1}", more.journal[0].g_value);
    println!("journal: {}", journal.display());
}

fn scratch_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("ibsat-example");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
