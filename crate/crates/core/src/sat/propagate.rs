use crate::cnf::{CnfFormula, Lit, PartialAssignment, Var};

/// Unit propagation derived the empty clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conflict {
    /// Index of the falsified clause.
    pub clause: usize,
}

/// Occurrence-list unit propagator, built once per formula and reusable for
/// any number of assumption sets. Independent of the CDCL engine.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    formula: &'a CnfFormula,
    occurrences: Vec<Vec<u32>>,
}

impl<'a> Propagator<'a> {
    pub fn new(formula: &'a CnfFormula) -> Self {
        let mut occurrences = vec![Vec::new(); 2 * formula.num_vars() as usize];
        for (i, clause) in formula.clauses().iter().enumerate() {
            for &l in clause {
                occurrences[l.code()].push(i as u32);
            }
        }
        Propagator { formula, occurrences }
    }

    pub fn formula(&self) -> &'a CnfFormula {
        self.formula
    }

    /// Closure of unit propagation over `formula ∧ assumptions`, as a value
    /// per variable (`values[i]` for variable `i + 1`).
    pub fn propagate(&self, assumptions: &[Lit]) -> Result<Vec<Option<bool>>, Conflict> {
        if self.formula.is_contradiction() {
            return Err(Conflict { clause: 0 });
        }
        let clauses = self.formula.clauses();
        let mut values: Vec<Option<bool>> = vec![None; self.formula.num_vars() as usize];
        let mut queue: Vec<Lit> = Vec::new();

        let value = |values: &[Option<bool>], l: Lit| values[l.var().index()].map(|v| v == l.is_positive());

        for &a in assumptions {
            match value(&values, a) {
                Some(true) => {}
                // contradictory assumptions: no clause is to blame
                Some(false) => return Err(Conflict { clause: usize::MAX }),
                None => {
                    values[a.var().index()] = Some(a.is_positive());
                    queue.push(a);
                }
            }
        }
        for (i, clause) in clauses.iter().enumerate() {
            if clause.len() == 1 {
                let l = clause[0];
                match value(&values, l) {
                    Some(true) => {}
                    Some(false) => return Err(Conflict { clause: i }),
                    None => {
                        values[l.var().index()] = Some(l.is_positive());
                        queue.push(l);
                    }
                }
            }
        }

        let mut head = 0;
        while head < queue.len() {
            let falsified = !queue[head];
            head += 1;
            for &ci in &self.occurrences[falsified.code()] {
                let clause = &clauses[ci as usize];
                let mut unassigned = None;
                let mut open = 0;
                let mut satisfied = false;
                for &l in clause {
                    match value(&values, l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match open {
                    0 => return Err(Conflict { clause: ci as usize }),
                    1 => {
                        let l = unassigned.unwrap();
                        values[l.var().index()] = Some(l.is_positive());
                        queue.push(l);
                    }
                    _ => {}
                }
            }
        }
        Ok(values)
    }
}

/// One-shot unit propagation over `formula ∧ assumptions`.
pub fn unit_propagate(
    formula: &CnfFormula,
    assumptions: &PartialAssignment,
) -> Result<PartialAssignment, Conflict> {
    let values = Propagator::new(formula).propagate(&assumptions.to_lits())?;
    Ok(values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|b| (Var::from_index(i), b)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::VariableRoles;

    fn formula(n: u32, cs: &[&[i32]]) -> CnfFormula {
        let clauses = cs.iter().map(|c| c.iter().map(|&x| Lit::from_dimacs(x)).collect()).collect();
        CnfFormula::new(n, clauses, VariableRoles::default()).unwrap()
    }

    #[test]
    fn chain() {
        let f = formula(2, &[&[1], &[-1, 2]]);
        let got = unit_propagate(&f, &PartialAssignment::new()).unwrap();
        let want: PartialAssignment = [(Var(1), true), (Var(2), true)].into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn conflict() {
        let f = formula(1, &[&[1], &[-1]]);
        assert!(unit_propagate(&f, &PartialAssignment::new()).is_err());
    }

    #[test]
    fn assumptions_drive_propagation() {
        let f = formula(3, &[&[-1, 2], &[-2, -3]]);
        let a: PartialAssignment = [(Var(1), true)].into_iter().collect();
        let got = unit_propagate(&f, &a).unwrap();
        assert_eq!(got.get(Var(3)), Some(false));
        let a: PartialAssignment = [(Var(1), true), (Var(3), true)].into_iter().collect();
        assert!(unit_propagate(&f, &a).is_err());
    }

    #[test]
    fn stops_without_units() {
        let f = formula(3, &[&[1, 2, 3]]);
        let got = unit_propagate(&f, &PartialAssignment::new()).unwrap();
        assert!(got.is_empty());
    }
}
