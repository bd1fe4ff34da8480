use crate::circuit::{CircuitNetlist, GateKind};

use super::{CnfFormula, Lit, Var, VariableRoles};

/// Tseitin encoding with one variable per wire: wire `w` (inputs first, then
/// gates in topological order) becomes variable `w + 1`. Every gate is
/// encoded biconditionally, which keeps unit propagation arc-consistent per
/// gate.
///
/// An output that names an input wire, or a wire already listed as an
/// output, gets a fresh variable tied to the wire by an equivalence so that
/// `X` and `Y` stay disjoint and duplicate-free.
pub fn tseitin_encode(circuit: &CircuitNetlist) -> CnfFormula {
    let n = circuit.num_inputs();
    let wire_var = |w: usize| Var::from_index(w);
    let pos = |w: usize| Lit::new(wire_var(w), true);
    let neg = |w: usize| Lit::new(wire_var(w), false);

    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    for (g, gate) in circuit.compiled_gates().iter().enumerate() {
        let o = n + g;
        let [a, b] = gate.operands;
        match gate.kind {
            GateKind::And if a == b => {
                clauses.push(vec![neg(o), pos(a)]);
                clauses.push(vec![pos(o), neg(a)]);
            }
            GateKind::Or if a == b => {
                clauses.push(vec![neg(o), pos(a)]);
                clauses.push(vec![pos(o), neg(a)]);
            }
            GateKind::Xor if a == b => clauses.push(vec![neg(o)]),
            GateKind::And => {
                clauses.push(vec![neg(o), pos(a)]);
                clauses.push(vec![neg(o), pos(b)]);
                clauses.push(vec![pos(o), neg(a), neg(b)]);
            }
            GateKind::Or => {
                clauses.push(vec![pos(o), neg(a)]);
                clauses.push(vec![pos(o), neg(b)]);
                clauses.push(vec![neg(o), pos(a), pos(b)]);
            }
            GateKind::Xor => {
                clauses.push(vec![neg(o), pos(a), pos(b)]);
                clauses.push(vec![neg(o), neg(a), neg(b)]);
                clauses.push(vec![pos(o), neg(a), pos(b)]);
                clauses.push(vec![pos(o), pos(a), neg(b)]);
            }
            GateKind::Not => {
                clauses.push(vec![pos(o), pos(a)]);
                clauses.push(vec![neg(o), neg(a)]);
            }
            GateKind::Const0 => clauses.push(vec![neg(o)]),
            GateKind::Const1 => clauses.push(vec![pos(o)]),
        }
    }

    let mut num_vars = circuit.num_wires() as u32;
    let mut used = vec![false; circuit.num_wires()];
    let mut outputs = Vec::with_capacity(circuit.num_outputs());
    for &w in circuit.output_wires() {
        if w < n || used[w] {
            num_vars += 1;
            let y = Var(num_vars);
            clauses.push(vec![Lit::new(y, false), pos(w)]);
            clauses.push(vec![Lit::new(y, true), neg(w)]);
            outputs.push(y);
        } else {
            used[w] = true;
            outputs.push(wire_var(w));
        }
    }
    let roles = VariableRoles { inputs: (0..n).map(wire_var).collect(), outputs };
    CnfFormula::new(num_vars, clauses, roles).expect("Tseitin encoding produced an invalid formula")
}
