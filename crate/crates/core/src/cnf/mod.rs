//! CNF formulas with input/output role tracking, Tseitin encoding of circuits,
//! partial-assignment substitution and annotated DIMACS I/O.

mod dimacs;
mod tseitin;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dimacs::{read_dimacs, write_dimacs};
pub use tseitin::tseitin_encode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("literal {lit} out of range (formula has {num_vars} variables){}", fmt_line(*.line))]
    LiteralOutOfRange { lit: i64, num_vars: u32, line: Option<usize> },
    #[error("empty clause at index {0}")]
    EmptyClause(usize),
    #[error("tautological clause at index {0}")]
    Tautology(usize),
    #[error("variable {0} is listed as both input and output")]
    RoleOverlap(u32),
    #[error("variable {0} appears twice in a role list")]
    DuplicateRole(u32),
    #[error("malformed DIMACS at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

fn fmt_line(line: Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

/// A propositional variable, 1-based as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        Var(i as u32 + 1)
    }

    pub fn lit(self, value: bool) -> Lit {
        Lit::new(self, value)
    }
}

/// A literal in DIMACS convention: `+v` for `x_v`, `-v` for `¬x_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        let v = var.0 as i32;
        Lit(if positive { v } else { -v })
    }

    pub fn from_dimacs(x: i32) -> Self {
        assert!(x != 0, "zero is not a literal");
        Lit(x)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Dense code `2 * index + negated`, used for indexing solver tables.
    #[inline]
    pub fn code(self) -> usize {
        2 * (self.0.unsigned_abs() as usize - 1) + (self.0 < 0) as usize
    }

    #[inline]
    pub fn from_code(code: usize) -> Self {
        let v = (code / 2 + 1) as i32;
        Lit(if code & 1 == 1 { -v } else { v })
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The input (`X`) and output (`Y`) variable lists; everything else is
/// auxiliary. List order is bit order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariableRoles {
    pub inputs: Vec<Var>,
    pub outputs: Vec<Var>,
}

impl VariableRoles {
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.outputs.is_empty()
    }

    fn validate(&self, num_vars: u32) -> Result<(), CnfError> {
        let mut seen = vec![0u8; num_vars as usize + 1];
        for (list, tag) in [(&self.inputs, 1u8), (&self.outputs, 2u8)] {
            for &v in list {
                if v.0 == 0 || v.0 > num_vars {
                    return Err(CnfError::LiteralOutOfRange { lit: v.0 as i64, num_vars, line: None });
                }
                let slot = &mut seen[v.0 as usize];
                if *slot == tag {
                    return Err(CnfError::DuplicateRole(v.0));
                }
                if *slot != 0 {
                    return Err(CnfError::RoleOverlap(v.0));
                }
                *slot = tag;
            }
        }
        Ok(())
    }
}

/// Assignment to a subset of variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialAssignment(BTreeMap<Var, bool>);

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pairs `vars[i]` with `bits[i]`.
    pub fn from_bits(vars: &[Var], bits: &[bool]) -> Self {
        assert_eq!(vars.len(), bits.len(), "variable and bit lists differ in length");
        PartialAssignment(vars.iter().copied().zip(bits.iter().copied()).collect())
    }

    pub fn insert(&mut self, var: Var, value: bool) -> Option<bool> {
        self.0.insert(var, value)
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.0.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    /// Literals made true by this assignment, in variable order.
    pub fn to_lits(&self) -> Vec<Lit> {
        self.iter().map(|(v, b)| Lit::new(v, b)).collect()
    }

    /// Union; entries of `other` win on overlap.
    pub fn merged(&self, other: &PartialAssignment) -> PartialAssignment {
        let mut out = self.clone();
        out.0.extend(other.0.iter().map(|(&v, &b)| (v, b)));
        out
    }

    /// Values of `vars` in order, or `None` if any is unassigned.
    pub fn project(&self, vars: &[Var]) -> Option<Vec<bool>> {
        vars.iter().map(|&v| self.get(v)).collect()
    }
}

impl FromIterator<(Var, bool)> for PartialAssignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        PartialAssignment(iter.into_iter().collect())
    }
}

/// A clause set over variables `1..=num_vars`, with role metadata.
///
/// The canonical contradiction (the result of substituting into a clause
/// until it is empty) is represented by `contradiction == true` with no
/// clauses; otherwise no clause is empty and none is tautological.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    roles: VariableRoles,
    contradiction: bool,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Vec<Lit>>, roles: VariableRoles) -> Result<Self, CnfError> {
        for (i, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(CnfError::EmptyClause(i));
            }
            for &l in clause {
                if l.var().0 > num_vars {
                    return Err(CnfError::LiteralOutOfRange {
                        lit: l.to_dimacs() as i64,
                        num_vars,
                        line: None,
                    });
                }
                if clause.contains(&!l) {
                    return Err(CnfError::Tautology(i));
                }
            }
        }
        roles.validate(num_vars)?;
        Ok(CnfFormula { num_vars, clauses, roles, contradiction: false })
    }

    /// The trivially unsatisfiable formula over `num_vars` variables.
    pub fn contradiction(num_vars: u32, roles: VariableRoles) -> Self {
        CnfFormula { num_vars, clauses: Vec::new(), roles, contradiction: true }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        if self.contradiction {
            1
        } else {
            self.clauses.len()
        }
    }

    pub fn roles(&self) -> &VariableRoles {
        &self.roles
    }

    pub fn with_roles(mut self, roles: VariableRoles) -> Result<Self, CnfError> {
        roles.validate(self.num_vars)?;
        self.roles = roles;
        Ok(self)
    }

    pub fn is_contradiction(&self) -> bool {
        self.contradiction
    }

    /// `C[β/B]`: drops satisfied clauses and falsified literals. Variables keep
    /// their indices.
    pub fn substitute(&self, assignment: &PartialAssignment) -> CnfFormula {
        if self.contradiction {
            return self.clone();
        }
        let mut clauses = Vec::with_capacity(self.clauses.len());
        for clause in &self.clauses {
            let mut kept = Vec::with_capacity(clause.len());
            let mut satisfied = false;
            for &l in clause {
                match assignment.get(l.var()) {
                    Some(v) if v == l.is_positive() => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => kept.push(l),
                }
            }
            if satisfied {
                continue;
            }
            if kept.is_empty() {
                return CnfFormula::contradiction(self.num_vars, self.roles.clone());
            }
            clauses.push(kept);
        }
        CnfFormula { num_vars: self.num_vars, clauses, roles: self.roles.clone(), contradiction: false }
    }

    /// Whether a complete assignment (`model[i]` is variable `i + 1`)
    /// satisfies every clause.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        !self.contradiction
            && self
                .clauses
                .iter()
                .all(|c| c.iter().any(|l| model[l.var().index()] == l.is_positive()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(xs: &[i32]) -> Vec<Lit> {
        xs.iter().map(|&x| Lit::from_dimacs(x)).collect()
    }

    fn formula(n: u32, cs: &[&[i32]]) -> CnfFormula {
        CnfFormula::new(n, cs.iter().map(|c| lits(c)).collect(), VariableRoles::default()).unwrap()
    }

    #[test]
    fn literal_codes() {
        for x in [1, -1, 7, -7] {
            let l = Lit::from_dimacs(x);
            assert_eq!(Lit::from_code(l.code()), l);
        }
        assert_eq!(Lit::from_dimacs(3).code() ^ 1, (!Lit::from_dimacs(3)).code());
    }

    #[test]
    fn substitution_simplifies() {
        let f = formula(3, &[&[1, 2], &[-1, 3]]);
        let a: PartialAssignment = [(Var(1), true)].into_iter().collect();
        let g = f.substitute(&a);
        assert_eq!(g.clauses(), &[lits(&[3])]);
        assert_eq!(g.num_vars(), 3);
    }

    #[test]
    fn substitution_contradiction() {
        let f = formula(1, &[&[1], &[-1]]);
        let a: PartialAssignment = [(Var(1), true)].into_iter().collect();
        let g = f.substitute(&a);
        assert!(g.is_contradiction());
        assert_eq!(g, CnfFormula::contradiction(1, VariableRoles::default()));
    }

    #[test]
    fn construction_rejects_bad_clauses() {
        assert!(matches!(
            CnfFormula::new(2, vec![lits(&[1, -1])], VariableRoles::default()),
            Err(CnfError::Tautology(0))
        ));
        assert!(matches!(
            CnfFormula::new(2, vec![vec![]], VariableRoles::default()),
            Err(CnfError::EmptyClause(0))
        ));
        assert!(matches!(
            CnfFormula::new(2, vec![lits(&[3])], VariableRoles::default()),
            Err(CnfError::LiteralOutOfRange { lit: 3, .. })
        ));
        let overlap = VariableRoles { inputs: vec![Var(1)], outputs: vec![Var(1)] };
        assert!(matches!(CnfFormula::new(2, vec![], overlap), Err(CnfError::RoleOverlap(1))));
    }
}
