use std::collections::HashMap;
use std::fmt;

use super::CircuitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Not,
    Xor,
    Const0,
    Const1,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::And | GateKind::Or | GateKind::Xor => 2,
            GateKind::Not => 1,
            GateKind::Const0 | GateKind::Const1 => 0,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
            GateKind::Xor => "XOR",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "AND" => GateKind::And,
            "OR" => GateKind::Or,
            "NOT" => GateKind::Not,
            "XOR" => GateKind::Xor,
            "CONST0" => GateKind::Const0,
            "CONST1" => GateKind::Const1,
            _ => return None,
        })
    }

    #[inline]
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Not => !a,
            GateKind::Xor => a ^ b,
            GateKind::Const0 => false,
            GateKind::Const1 => true,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub output: String,
    pub kind: GateKind,
    pub operands: Vec<String>,
}

/// Index of a wire inside a netlist: inputs occupy `0..n`, gate outputs follow
/// in gate order.
pub type WireId = usize;

/// Gate with operands resolved to wire indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompiledGate {
    pub kind: GateKind,
    pub operands: [WireId; 2],
}

/// A validated, topologically ordered gate-level netlist computing
/// `f: {0,1}^n -> {0,1}^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitNetlist {
    inputs: Vec<String>,
    outputs: Vec<String>,
    gates: Vec<Gate>,
    compiled: Vec<CompiledGate>,
    output_wires: Vec<WireId>,
}

impl CircuitNetlist {
    /// Validates and topologically orders the gates. Gates may be given in any
    /// order; the relative order of independent gates is preserved.
    pub fn new(
        inputs: Vec<String>,
        outputs: Vec<String>,
        gates: Vec<Gate>,
    ) -> Result<Self, CircuitError> {
        let mut defined: HashMap<&str, usize> = HashMap::new();
        for (i, name) in inputs.iter().enumerate() {
            check_name(name)?;
            if defined.insert(name.as_str(), i).is_some() {
                return Err(CircuitError::DuplicateWire { name: name.clone(), line: None });
            }
        }
        for (g, gate) in gates.iter().enumerate() {
            check_name(&gate.output)?;
            if gate.operands.len() != gate.kind.arity() {
                return Err(CircuitError::Arity {
                    wire: gate.output.clone(),
                    kind: gate.kind,
                    got: gate.operands.len(),
                });
            }
            if defined.insert(gate.output.as_str(), inputs.len() + g).is_some() {
                return Err(CircuitError::DuplicateWire { name: gate.output.clone(), line: None });
            }
        }
        for gate in &gates {
            for op in &gate.operands {
                if !defined.contains_key(op.as_str()) {
                    return Err(CircuitError::UndefinedWire { name: op.clone(), line: None });
                }
            }
        }
        for out in &outputs {
            if !defined.contains_key(out.as_str()) {
                return Err(CircuitError::UndefinedWire { name: out.clone(), line: None });
            }
        }
        if inputs.is_empty() {
            return Err(CircuitError::NoInputs);
        }
        if outputs.is_empty() {
            return Err(CircuitError::NoOutputs);
        }

        let order = topological_order(&inputs, &gates, &defined)?;
        let gates: Vec<Gate> = order.into_iter().map(|g| gates[g].clone()).collect();

        let mut ids: HashMap<&str, WireId> = HashMap::new();
        for (i, name) in inputs.iter().enumerate() {
            ids.insert(name, i);
        }
        let mut compiled = Vec::with_capacity(gates.len());
        for (g, gate) in gates.iter().enumerate() {
            let mut operands = [0; 2];
            for (slot, op) in gate.operands.iter().enumerate() {
                operands[slot] = ids[op.as_str()];
            }
            compiled.push(CompiledGate { kind: gate.kind, operands });
            ids.insert(&gate.output, inputs.len() + g);
        }
        let output_wires = outputs.iter().map(|o| ids[o.as_str()]).collect();

        Ok(CircuitNetlist { inputs, outputs, gates, compiled, output_wires })
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn num_wires(&self) -> usize {
        self.inputs.len() + self.gates.len()
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn compiled_gates(&self) -> &[CompiledGate] {
        &self.compiled
    }

    pub fn output_wires(&self) -> &[WireId] {
        &self.output_wires
    }

    /// Values of every wire (inputs first, then gate outputs in order).
    pub fn evaluate_wires(&self, input: &[bool]) -> Result<Vec<bool>, CircuitError> {
        if input.len() != self.inputs.len() {
            return Err(CircuitError::InputLength { expected: self.inputs.len(), got: input.len() });
        }
        let mut wires = Vec::with_capacity(self.num_wires());
        wires.extend_from_slice(input);
        for gate in &self.compiled {
            let a = gate.kind.arity() > 0 && wires[gate.operands[0]];
            let b = gate.kind.arity() > 1 && wires[gate.operands[1]];
            wires.push(gate.kind.apply(a, b));
        }
        Ok(wires)
    }

    /// Computes `f(input)`.
    pub fn evaluate(&self, input: &[bool]) -> Result<Vec<bool>, CircuitError> {
        let wires = self.evaluate_wires(input)?;
        Ok(self.output_wires.iter().map(|&w| wires[w]).collect())
    }

    /// Serializes to the line-oriented netlist format accepted by
    /// [`super::parse_netlist`].
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CircuitNetlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for name in &self.inputs {
            writeln!(f, "INPUT({name})")?;
        }
        for name in &self.outputs {
            writeln!(f, "OUTPUT({name})")?;
        }
        for gate in &self.gates {
            writeln!(f, "{} = {}({})", gate.output, gate.kind, gate.operands.join(", "))?;
        }
        Ok(())
    }
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_name(name: &str) -> Result<(), CircuitError> {
    if is_valid_name(name) {
        Ok(())
    } else {
        Err(CircuitError::InvalidName(name.to_string()))
    }
}

/// Kahn's algorithm, always releasing the lowest-indexed ready gate so that an
/// already ordered list comes back unchanged.
fn topological_order(
    inputs: &[String],
    gates: &[Gate],
    defined: &HashMap<&str, usize>,
) -> Result<Vec<usize>, CircuitError> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = inputs.len();
    let mut pending = vec![0usize; gates.len()];
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    for (g, gate) in gates.iter().enumerate() {
        for op in &gate.operands {
            let src = defined[op.as_str()];
            if src >= n {
                pending[g] += 1;
                users[src - n].push(g);
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..gates.len()).filter(|&g| pending[g] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(gates.len());
    while let Some(Reverse(g)) = ready.pop() {
        order.push(g);
        for &u in &users[g] {
            pending[u] -= 1;
            if pending[u] == 0 {
                ready.push(Reverse(u));
            }
        }
    }
    if order.len() != gates.len() {
        let stuck = (0..gates.len()).find(|&g| pending[g] > 0).expect("some gate is blocked");
        return Err(CircuitError::Cycle { wire: gates[stuck].output.clone() });
    }
    Ok(order)
}
