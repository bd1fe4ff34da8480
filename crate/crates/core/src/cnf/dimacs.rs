use std::fmt::Write as _;

use super::{CnfError, CnfFormula, Lit, Var, VariableRoles};

const INPUT_TAG: &str = "c ibs input";
const OUTPUT_TAG: &str = "c ibs output";

/// Serializes to DIMACS CNF with `c ibs input ...` / `c ibs output ...`
/// role annotations ahead of the header. The contradiction is written as a
/// single empty clause.
pub fn write_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::new();
    for (tag, vars) in [(INPUT_TAG, &formula.roles().inputs), (OUTPUT_TAG, &formula.roles().outputs)] {
        if vars.is_empty() {
            continue;
        }
        out.push_str(tag);
        for v in vars.iter() {
            write!(out, " {}", v.0).unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses()).unwrap();
    if formula.is_contradiction() {
        out.push_str("0\n");
    }
    for clause in formula.clauses() {
        for l in clause {
            write!(out, "{l} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}

/// Parses DIMACS CNF. Missing role annotations yield empty roles; an empty
/// clause yields the canonical contradiction.
pub fn read_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut saw_empty = false;

    let malformed = |line: usize, message: &str| CnfError::Malformed { line, message: message.to_string() };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed == "%" {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            let target = if trimmed.starts_with(INPUT_TAG) {
                Some((&mut inputs, &rest[INPUT_TAG.len() - 1..]))
            } else if trimmed.starts_with(OUTPUT_TAG) {
                Some((&mut outputs, &rest[OUTPUT_TAG.len() - 1..]))
            } else {
                None
            };
            if let Some((list, vars)) = target {
                for tok in vars.split_whitespace() {
                    let v: u32 = tok
                        .parse()
                        .ok()
                        .filter(|&v| v > 0)
                        .ok_or_else(|| malformed(line_no, "bad variable in role annotation"))?;
                    list.push(Var(v));
                }
            }
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('p') {
            if header.is_some() {
                return Err(malformed(line_no, "duplicate header"));
            }
            let toks: Vec<&str> = rest.split_whitespace().collect();
            let parsed = match toks.as_slice() {
                ["cnf", v, c] => v.parse::<u32>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| malformed(line_no, "expected `p cnf <vars> <clauses>`"))?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(malformed(line_no, "clause before header"));
        };
        for tok in trimmed.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| malformed(line_no, "bad literal"))?;
            if x == 0 {
                if current.is_empty() {
                    saw_empty = true;
                } else {
                    clauses.push(std::mem::take(&mut current));
                }
                continue;
            }
            if x.unsigned_abs() > num_vars as u64 {
                return Err(CnfError::LiteralOutOfRange { lit: x, num_vars, line: Some(line_no) });
            }
            current.push(Lit::from_dimacs(x as i32));
        }
    }
    let Some((num_vars, num_clauses)) = header else {
        return Err(malformed(text.lines().count().max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        clauses.push(current);
    }
    let found = clauses.len() + saw_empty as usize;
    if found != num_clauses {
        return Err(malformed(
            text.lines().count(),
            &format!("header declares {num_clauses} clauses, found {found}"),
        ));
    }
    let roles = VariableRoles { inputs, outputs };
    if saw_empty {
        let f = CnfFormula::new(num_vars, Vec::new(), roles)?;
        return Ok(CnfFormula::contradiction(f.num_vars(), f.roles().clone()));
    }
    CnfFormula::new(num_vars, clauses, roles)
}
