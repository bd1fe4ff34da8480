use super::netlist::{CircuitNetlist, Gate, GateKind};
use super::CircuitError;

/// A signal under construction: either a known constant or a named wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Const(bool),
    Wire(usize),
}

/// Incremental netlist construction with constant folding. Gate wires are
/// named `g<k>`; input names are chosen by the caller.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    names: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    gates: Vec<Gate>,
    consts: [Option<usize>; 2],
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self, name: impl Into<String>) -> Signal {
        let name = name.into();
        self.inputs.push(name.clone());
        self.names.push(name);
        Signal::Wire(self.names.len() - 1)
    }

    fn gate(&mut self, kind: GateKind, operands: &[usize]) -> Signal {
        let output = format!("g{}", self.gates.len());
        let operands = operands.iter().map(|&w| self.names[w].clone()).collect();
        self.gates.push(Gate { output: output.clone(), kind, operands });
        self.names.push(output);
        Signal::Wire(self.names.len() - 1)
    }

    pub fn not(&mut self, a: Signal) -> Signal {
        match a {
            Signal::Const(v) => Signal::Const(!v),
            Signal::Wire(w) => self.gate(GateKind::Not, &[w]),
        }
    }

    pub fn and(&mut self, a: Signal, b: Signal) -> Signal {
        match (a, b) {
            (Signal::Const(false), _) | (_, Signal::Const(false)) => Signal::Const(false),
            (Signal::Const(true), x) | (x, Signal::Const(true)) => x,
            (Signal::Wire(x), Signal::Wire(y)) => self.gate(GateKind::And, &[x, y]),
        }
    }

    pub fn or(&mut self, a: Signal, b: Signal) -> Signal {
        match (a, b) {
            (Signal::Const(true), _) | (_, Signal::Const(true)) => Signal::Const(true),
            (Signal::Const(false), x) | (x, Signal::Const(false)) => x,
            (Signal::Wire(x), Signal::Wire(y)) => self.gate(GateKind::Or, &[x, y]),
        }
    }

    pub fn xor(&mut self, a: Signal, b: Signal) -> Signal {
        match (a, b) {
            (Signal::Const(u), Signal::Const(v)) => Signal::Const(u ^ v),
            (Signal::Const(false), x) | (x, Signal::Const(false)) => x,
            (Signal::Const(true), x) | (x, Signal::Const(true)) => self.not(x),
            (Signal::Wire(x), Signal::Wire(y)) => self.gate(GateKind::Xor, &[x, y]),
        }
    }

    pub fn xor_all(&mut self, signals: &[Signal]) -> Signal {
        signals.iter().fold(Signal::Const(false), |acc, &s| self.xor(acc, s))
    }

    /// `(sel ∧ a) ⊕ (¬sel ∧ b)`, the Geffe combiner.
    pub fn mux(&mut self, sel: Signal, a: Signal, b: Signal) -> Signal {
        let t = self.and(sel, a);
        let nsel = self.not(sel);
        let e = self.and(nsel, b);
        self.xor(t, e)
    }

    fn materialize(&mut self, s: Signal) -> usize {
        match s {
            Signal::Wire(w) => w,
            Signal::Const(v) => {
                if let Some(w) = self.consts[v as usize] {
                    return w;
                }
                let kind = if v { GateKind::Const1 } else { GateKind::Const0 };
                let Signal::Wire(w) = self.gate(kind, &[]) else { unreachable!() };
                self.consts[v as usize] = Some(w);
                w
            }
        }
    }

    pub fn output(&mut self, s: Signal) {
        let w = self.materialize(s);
        self.outputs.push(self.names[w].clone());
    }

    pub fn finish(self) -> Result<CircuitNetlist, CircuitError> {
        CircuitNetlist::new(self.inputs, self.outputs, self.gates)
    }
}
