//! Inverse backdoor sets for SAT-based cryptanalysis.
//!
//! A function `f: {0,1}^n -> {0,1}^m` given as a gate netlist is encoded to
//! CNF, and subsets `B` of its inputs are scored by how cheaply the inversion
//! problem `f(x) = γ` can be solved once the bits in `B` are guessed. The
//! crate covers the whole pipeline: netlists and toy cipher generators
//! ([`circuit`]), CNF and DIMACS ([`cnf`]), a budgeted CDCL solver ([`sat`]),
//! Monte-Carlo estimation of the resistance function ([`estimator`]), tabu
//! search over `{0,1}^n` ([`search`]), guess-and-determine attacks
//! ([`attack`]), and the `ibsat` command line ([`cli`], [`config`]).

pub mod attack;
pub mod circuit;
pub mod cli;
pub mod cnf;
pub mod config;
pub mod estimator;
pub mod sat;
pub mod search;
