//! Gate-level circuits: the keyed functions `f: {0,1}^n -> {0,1}^m` under
//! attack, their text format, and built-in toy cipher generators.

mod builder;
pub mod ciphers;
mod netlist;
mod parse;

use thiserror::Error;

pub use builder::{NetlistBuilder, Signal};
pub use ciphers::{
    generate_cipher, CipherSpec, FeistelSpec, GeffeSpec, LfsrSpec, NlfsrRegister, SpnSpec,
    TriviumSpec,
};
pub use netlist::{CircuitNetlist, CompiledGate, Gate, GateKind, WireId};
pub use parse::parse_netlist;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("undefined wire `{name}`{}", fmt_line(*.line))]
    UndefinedWire { name: String, line: Option<usize> },
    #[error("duplicate definition of wire `{name}`{}", fmt_line(*.line))]
    DuplicateWire { name: String, line: Option<usize> },
    #[error("cyclic definition involving wire `{wire}`")]
    Cycle { wire: String },
    #[error("gate `{wire}`: {kind} takes {} operand(s), got {got}", kind.arity())]
    Arity { wire: String, kind: GateKind, got: usize },
    #[error("invalid wire name `{0}`")]
    InvalidName(String),
    #[error("netlist has no inputs")]
    NoInputs,
    #[error("netlist has no outputs")]
    NoOutputs,
    #[error("input has {got} bits, circuit expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("invalid cipher spec: {0}")]
    InvalidSpec(String),
    #[error("{0}")]
    Io(String),
}

fn fmt_line(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

/// Reads and parses a netlist file.
pub fn load_netlist(path: impl AsRef<std::path::Path>) -> Result<CircuitNetlist, CircuitError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| CircuitError::Io(format!("{}: {e}", path.display())))?;
    parse_netlist(&text)
}
