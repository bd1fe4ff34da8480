use std::collections::HashMap;

use super::netlist::{is_valid_name, CircuitNetlist, Gate, GateKind};
use super::CircuitError;

/// Parses the line-oriented netlist format:
///
/// ```text
/// # comment
/// INPUT(a)
/// INPUT(b)
/// OUTPUT(y)
/// y = AND(a, b)
/// ```
///
/// Gate definitions may appear in any order; the result is topologically
/// sorted. Input and output order is declaration order.
pub fn parse_netlist(text: &str) -> Result<CircuitNetlist, CircuitError> {
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut gates = Vec::new();
    // wire name -> line of its definition
    let mut defined: HashMap<String, usize> = HashMap::new();
    let mut uses: Vec<(String, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor { line: line_no, text: line, pos: 0 };
        cur.skip_ws();
        let first = cur.ident()?;
        cur.skip_ws();
        match first {
            "INPUT" | "OUTPUT" if cur.peek() == Some('(') => {
                cur.expect('(')?;
                cur.skip_ws();
                let name = cur.ident()?.to_string();
                cur.skip_ws();
                cur.expect(')')?;
                cur.end()?;
                if first == "INPUT" {
                    if defined.insert(name.clone(), line_no).is_some() {
                        return Err(CircuitError::DuplicateWire { name, line: Some(line_no) });
                    }
                    inputs.push(name);
                } else {
                    uses.push((name.clone(), line_no));
                    outputs.push(name);
                }
            }
            _ => {
                let output = first.to_string();
                cur.expect('=')?;
                cur.skip_ws();
                let kind_col = cur.pos + 1;
                let kw = cur.ident()?;
                let kind = GateKind::from_keyword(kw).ok_or_else(|| CircuitError::Syntax {
                    line: line_no,
                    column: kind_col,
                    message: format!("unknown gate kind `{kw}`"),
                })?;
                cur.skip_ws();
                cur.expect('(')?;
                cur.skip_ws();
                let mut operands = Vec::new();
                if cur.peek() != Some(')') {
                    loop {
                        cur.skip_ws();
                        let op = cur.ident()?.to_string();
                        uses.push((op.clone(), line_no));
                        operands.push(op);
                        cur.skip_ws();
                        match cur.peek() {
                            Some(',') => cur.pos += 1,
                            _ => break,
                        }
                    }
                }
                cur.expect(')')?;
                cur.end()?;
                if operands.len() != kind.arity() {
                    return Err(CircuitError::Arity { wire: output, kind, got: operands.len() });
                }
                if defined.insert(output.clone(), line_no).is_some() {
                    return Err(CircuitError::DuplicateWire { name: output, line: Some(line_no) });
                }
                gates.push(Gate { output, kind, operands });
            }
        }
    }

    for (name, line) in uses {
        if !defined.contains_key(&name) {
            return Err(CircuitError::UndefinedWire { name, line: Some(line) });
        }
    }
    CircuitNetlist::new(inputs, outputs, gates)
}

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn error(&self, message: impl Into<String>) -> CircuitError {
        CircuitError::Syntax { line: self.line, column: self.pos + 1, message: message.into() }
    }

    fn ident(&mut self) -> Result<&'a str, CircuitError> {
        let rest = &self.text[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        let word = &rest[..len];
        if !is_valid_name(word) {
            return Err(self.error("expected identifier"));
        }
        self.pos += len;
        Ok(word)
    }

    fn expect(&mut self, c: char) -> Result<(), CircuitError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn end(&mut self) -> Result<(), CircuitError> {
        self.skip_ws();
        if self.pos == self.text.len() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_and() {
        let c = parse_netlist("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)").unwrap();
        assert_eq!(c.num_inputs(), 2);
        assert_eq!(c.num_outputs(), 1);
        assert_eq!(c.gates().len(), 1);
        assert_eq!(c.gates()[0].kind, GateKind::And);
        assert_eq!(c.evaluate(&[true, true]).unwrap(), vec![true]);
        assert_eq!(c.evaluate(&[true, false]).unwrap(), vec![false]);
    }

    #[test]
    fn undefined_operand() {
        let err = parse_netlist("OUTPUT(y)\ny = AND(a, b)").unwrap_err();
        match err {
            CircuitError::UndefinedWire { name, line } => {
                assert_eq!(name, "a");
                assert_eq!(line, Some(2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn forward_references_are_sorted() {
        let c = parse_netlist(
            "INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = NOT(t)   # defined before t\nt = XOR(a, b)\n",
        )
        .unwrap();
        assert_eq!(c.gates()[0].output, "t");
        assert_eq!(c.evaluate(&[true, false]).unwrap(), vec![false]);
    }

    #[test]
    fn cycle_rejected() {
        let err = parse_netlist("INPUT(a)\nOUTPUT(p)\np = AND(a, q)\nq = NOT(p)").unwrap_err();
        assert!(matches!(err, CircuitError::Cycle { .. }), "{err:?}");
    }

    #[test]
    fn duplicate_rejected() {
        let err = parse_netlist("INPUT(a)\nINPUT(a)\nOUTPUT(a)").unwrap_err();
        assert!(matches!(err, CircuitError::DuplicateWire { line: Some(2), .. }), "{err:?}");
        let err = parse_netlist("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\ny = NOT(a)").unwrap_err();
        assert!(matches!(err, CircuitError::DuplicateWire { line: Some(4), .. }), "{err:?}");
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_netlist("INPUT(a)\nOUTPUT(y)\ny = NAND(a, a)").unwrap_err();
        assert!(
            matches!(err, CircuitError::Syntax { line: 3, column: 5, .. }),
            "{err:?}"
        );
        let err = parse_netlist("INPUT(a\n").unwrap_err();
        assert!(matches!(err, CircuitError::Syntax { line: 1, column: 8, .. }), "{err:?}");
        let err = parse_netlist("INPUT(a)\nOUTPUT(y)\ny = NOT(a, a)").unwrap_err();
        assert!(matches!(err, CircuitError::Arity { got: 2, .. }), "{err:?}");
    }

    #[test]
    fn constants_and_comments() {
        let c = parse_netlist(
            "# header\nINPUT(k)\nOUTPUT(y)\nOUTPUT(one)\none = CONST1()\ny = XOR(k, one) # flip\n",
        )
        .unwrap();
        assert_eq!(c.evaluate(&[false]).unwrap(), vec![true, true]);
        assert_eq!(c.evaluate(&[true]).unwrap(), vec![false, true]);
    }

    #[test]
    fn output_may_name_an_input() {
        let c = parse_netlist("INPUT(x)\nOUTPUT(x)").unwrap();
        assert_eq!(c.evaluate(&[true]).unwrap(), vec![true]);
    }

    #[test]
    fn printer_round_trip() {
        let text = "INPUT(a)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(n)\nn = NOT(y)\ny = OR(a, b)\n";
        let c = parse_netlist(text).unwrap();
        assert_eq!(parse_netlist(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn wrong_input_length() {
        let c = parse_netlist("INPUT(a)\nOUTPUT(a)").unwrap();
        assert!(matches!(
            c.evaluate(&[true, true]),
            Err(CircuitError::InputLength { expected: 1, got: 2 })
        ));
    }
}
