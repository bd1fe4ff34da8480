//! Tabu search for low values of the resistance function over `{0,1}^n`.
//!
//! The search is a deterministic state machine ([`TabuState`]) driven by an
//! [`Objective`]. Every evaluated point is appended to a JSONL journal as
//! soon as it is known; a run is resumed by replaying the journal through a
//! fresh state machine.

mod journal;
mod objective;
mod tabu;

use std::path::PathBuf;

use thiserror::Error;

pub use journal::{read_journal, JournalContents, JournalRecord, JournalWriter, SampleStats};
pub use objective::{Evaluation, FnObjective, Objective, ResistanceObjective};
pub(crate) use objective::now;
pub use tabu::{
    get_new_center, neighborhood, restore, tabu_minimize, RunOptions, SearchConfig, SearchOutcome, TabuState,
    Termination,
};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("journal {path}: line {line}: {message}")]
    CorruptJournal { path: PathBuf, line: usize, message: String },
    #[error("journal is empty: nothing to restore")]
    EmptyJournal,
    #[error("journal record {line} does not match this configuration: {message}")]
    JournalMismatch { line: usize, message: String },
    #[error("objective failed: {0}")]
    Objective(String),
    #[error("journal I/O: {0}")]
    Io(#[from] std::io::Error),
}
