#![allow(dead_code)]

//! Test oracles: direct simulators of the cipher families, written on plain
//! bit vectors and integers (no netlists, no ANF), plus small helpers.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ibsat::circuit::{load_netlist, CipherSpec, CircuitNetlist, FeistelSpec, GeffeSpec, SpnSpec, TriviumSpec};
use ibsat::cnf::{tseitin_encode, CnfFormula, Lit, Var, VariableRoles};
use ibsat::sat::{check_model, SolveBudget, Solver, SolverConfig, Verdict};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn cipher_path(name: &str) -> PathBuf {
    manifest_dir().join("ciphers").join(format!("{name}.toml"))
}

pub fn load_cipher(name: &str) -> (CipherSpec, CircuitNetlist, CnfFormula) {
    let spec = CipherSpec::load(cipher_path(name)).expect("shipped spec loads");
    let circuit = spec.generate().expect("shipped spec generates");
    let formula = tseitin_encode(&circuit);
    (spec, circuit, formula)
}

pub const SHIPPED_CIPHERS: &[&str] =
    &["geffe_3_4_5", "geffe_7_8_9", "trivium_10_11", "toy_spn_8", "toy_spn_16", "toy_feistel"];

pub fn bits_of(value: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| value >> i & 1 == 1).collect()
}

pub fn value_of(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (b as u64) << i)
}

pub fn simulate(spec: &CipherSpec, key: &[bool]) -> Vec<bool> {
    match spec {
        CipherSpec::Geffe(g) => geffe(g, key),
        CipherSpec::TriviumFamily(t) => trivium(t, key),
        CipherSpec::ToyFeistel(f) => feistel(f, key),
        CipherSpec::ToySpn(s) => spn(s, key),
    }
}

pub fn geffe(g: &GeffeSpec, key: &[bool]) -> Vec<bool> {
    let mut streams = Vec::new();
    let mut off = 0;
    for r in &g.registers {
        let mut u: Vec<bool> = key[off..off + r.length].to_vec();
        off += r.length;
        for i in 0.. {
            if u.len() >= g.output_bits {
                break;
            }
            let bit = r.taps.iter().fold(false, |acc, &p| acc ^ u[i + p]);
            u.push(bit);
        }
        streams.push(u);
    }
    (0..g.output_bits).map(|i| if streams[0][i] { streams[1][i] } else { streams[2][i] }).collect()
}

pub fn trivium(t: &TriviumSpec, key: &[bool]) -> Vec<bool> {
    let k = t.registers.len();
    let mut off = 0;
    let mut regs: Vec<Vec<bool>> = t
        .registers
        .iter()
        .map(|r| {
            let s = key[off..off + r.length].to_vec();
            off += r.length;
            s
        })
        .collect();
    let mut out = Vec::new();
    for clock in 0..t.warmup + t.output_bits {
        let lin: Vec<bool> =
            (0..k).map(|i| t.registers[i].out_taps.iter().fold(false, |a, &p| a ^ regs[i][p])).collect();
        if clock >= t.warmup {
            out.push(lin.iter().fold(false, |a, &b| a ^ b));
        }
        let fed: Vec<bool> = (0..k)
            .map(|i| {
                let r = &t.registers[i];
                lin[i] ^ (regs[i][r.and_taps[0]] & regs[i][r.and_taps[1]]) ^ regs[(i + 1) % k][r.feedback_tap]
            })
            .collect();
        for i in 0..k {
            let target = &mut regs[(i + 1) % k];
            target.rotate_right(1);
            target[0] = fed[i];
        }
    }
    out
}

fn rotl_word(x: u64, r: usize, width: usize) -> u64 {
    let mask = (1u64 << width) - 1;
    let r = r % width;
    if r == 0 {
        x & mask
    } else {
        ((x << r) | (x >> (width - r))) & mask
    }
}

fn sbox_word(sbox: &[u8], x: u64, width: usize) -> u64 {
    let w = sbox.len().trailing_zeros() as usize;
    let mut out = 0;
    for c in 0..width / w {
        let v = (x >> (c * w)) & ((1 << w) - 1);
        out |= (sbox[v as usize] as u64) << (c * w);
    }
    out
}

pub fn feistel(f: &FeistelSpec, key: &[bool]) -> Vec<bool> {
    let h = f.half_bits;
    let mask = (1u64 << h) - 1;
    let mut l = f.plaintext & mask;
    let mut r = (f.plaintext >> h) & mask;
    for round in 0..f.rounds {
        let k = (0..h).fold(0u64, |acc, j| acc | (key[(round * h + j) % f.key_bits] as u64) << j);
        let fo = rotl_word(sbox_word(&f.sbox, r ^ k, h), f.rotation, h);
        let nr = l ^ fo;
        l = r;
        r = nr;
    }
    bits_of(l | r << h, 2 * h)
}

pub fn spn(s: &SpnSpec, key: &[bool]) -> Vec<bool> {
    let w = key.len();
    let k = value_of(key);
    let mut x = s.plaintext & ((1u64 << w) - 1);
    for round in 0..s.rounds {
        x ^= rotl_word(k, round * s.key_rotation, w);
        let y = sbox_word(&s.sbox, x, w);
        x = 0;
        for j in 0..w {
            let dst = if j == w - 1 { j } else { j * s.sbox_count % (w - 1) };
            x |= (y >> j & 1) << dst;
        }
    }
    x ^= rotl_word(k, s.rounds * s.key_rotation, w);
    bits_of(x, w)
}

/// Wilson score interval at `z`.
pub fn wilson(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    (center - half, center + half)
}

/// All models of `formula ∧ assumptions`, projected on `vars`, found by
/// repeated CDCL calls with a blocking clause per projected model.
pub fn projected_models(formula: &CnfFormula, assumptions: &[Lit], vars: &[Var]) -> Vec<Vec<bool>> {
    let mut clauses: Vec<Vec<Lit>> = formula.clauses().to_vec();
    let mut found = Vec::new();
    loop {
        let f = CnfFormula::new(formula.num_vars(), clauses.clone(), formula.roles().clone()).unwrap();
        let r = Solver::new(&f, SolverConfig::default()).solve(assumptions, &SolveBudget::conflicts(1 << 40));
        match r.verdict {
            Verdict::Sat => {
                let model = r.model.unwrap();
                assert!(check_model(&f, &model, assumptions));
                let proj: Vec<bool> = vars.iter().map(|v| model[v.index()]).collect();
                clauses.push(vars.iter().zip(&proj).map(|(&v, &b)| Lit::new(v, !b)).collect());
                found.push(proj);
            }
            Verdict::Unsat => return found,
            Verdict::BudgetExceeded => panic!("unbounded budget exceeded"),
        }
    }
}

/// Textbook unit propagation: rescan all clauses until nothing changes.
/// `None` on conflict.
pub fn naive_propagate(formula: &CnfFormula, assumptions: &[Lit]) -> Option<Vec<Option<bool>>> {
    let mut val: Vec<Option<bool>> = vec![None; formula.num_vars() as usize];
    for l in assumptions {
        match val[l.var().index()] {
            Some(b) if b != l.is_positive() => return None,
            _ => val[l.var().index()] = Some(l.is_positive()),
        }
    }
    loop {
        let mut changed = false;
        for c in formula.clauses() {
            let mut open = Vec::new();
            let mut sat = false;
            for l in c {
                match val[l.var().index()] {
                    Some(b) if b == l.is_positive() => sat = true,
                    Some(_) => {}
                    None => open.push(*l),
                }
            }
            if sat {
                continue;
            }
            match open.len() {
                0 => return None,
                1 => {
                    val[open[0].var().index()] = Some(open[0].is_positive());
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return Some(val);
        }
    }
}

/// The netlist corpus, sorted by file stem.
pub fn netlist_corpus() -> Vec<(String, CircuitNetlist)> {
    let mut out: Vec<_> = std::fs::read_dir(manifest_dir().join("netlists"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), load_netlist(&p).unwrap()))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Netlists plus shipped ciphers with at most `max_inputs` inputs.
pub fn corpus_up_to(max_inputs: usize) -> Vec<(String, CircuitNetlist)> {
    let mut out = netlist_corpus();
    for name in SHIPPED_CIPHERS {
        let (_, c, _) = load_cipher(name);
        out.push((name.to_string(), c));
    }
    out.retain(|(_, c)| c.num_inputs() <= max_inputs);
    out
}

/// `P_B(t)` over all `2^n` inputs: outputs from the circuit evaluator, each
/// subproblem `C[γ/Y, β/B]` solved directly on a fresh default solver.
pub fn exhaustive_p(circuit: &CircuitNetlist, formula: &CnfFormula, chi: &[bool], budget: &SolveBudget) -> f64 {
    let n = circuit.num_inputs();
    let xs = &formula.roles().inputs;
    let ys = &formula.roles().outputs;
    let solved = (0..1u64 << n)
        .filter(|&v| {
            let alpha = bits_of(v, n);
            let gamma = circuit.evaluate(&alpha).unwrap();
            let mut a: Vec<Lit> = ys.iter().zip(&gamma).map(|(&y, &b)| Lit::new(y, b)).collect();
            a.extend((0..n).filter(|&i| chi[i]).map(|i| Lit::new(xs[i], alpha[i])));
            Solver::new(formula, SolverConfig::default()).solve(&a, budget).is_decided()
        })
        .count();
    solved as f64 / (1u64 << n) as f64
}

/// Uniform random 3-CNF with distinct variables per clause.
pub fn random_3cnf(n: u32, m: usize, rng: &mut ChaCha8Rng) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            sample(rng, n as usize, 3)
                .into_iter()
                .map(|i| Lit::new(Var::from_index(i), rng.gen()))
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses, VariableRoles::default()).unwrap()
}

pub fn lits_for(vars: &[Var], bits: &[bool]) -> Vec<Lit> {
    vars.iter().zip(bits).map(|(&v, &b)| Lit::new(v, b)).collect()
}

/// Forward direction: every α extends to a model whose Y part is f(α).
/// Backward direction: the X-projections of models of C[γ/Y] are exactly
/// the brute-force preimages of γ.
pub fn check_encoding_exhaustively(name: &str, circuit: &ibsat::circuit::CircuitNetlist) -> usize {
    let f = tseitin_encode(circuit);
    let (xs, ys) = (&f.roles().inputs, &f.roles().outputs);
    assert_eq!((xs.len(), ys.len()), (circuit.num_inputs(), circuit.num_outputs()), "{name}");
    let n = circuit.num_inputs();
    let mut preimages: BTreeMap<Vec<bool>, Vec<Vec<bool>>> = BTreeMap::new();
    let template = Solver::new(&f, SolverConfig::default());
    for v in 0..1u64 << n {
        let alpha = bits_of(v, n);
        let gamma = circuit.evaluate(&alpha).unwrap();
        let mut assumptions = lits_for(xs, &alpha);
        assumptions.extend(lits_for(ys, &gamma));
        let r = template.clone().solve(&assumptions, &SolveBudget::conflicts(1 << 40));
        assert!(r.is_sat(), "{name}: C[f(α)/Y, α/X] unsatisfiable at α={v:#x}");
        preimages.entry(gamma).or_default().push(alpha);
    }
    for (gamma, mut want) in preimages.iter().map(|(g, p)| (g.clone(), p.clone())) {
        let mut got = projected_models(&f, &lits_for(ys, &gamma), xs);
        for alpha in &got {
            assert_eq!(circuit.evaluate(alpha).unwrap(), gamma, "{name}: model is not a preimage");
        }
        got.sort();
        want.sort();
        assert_eq!(got, want, "{name}: preimage sets differ");
    }
    preimages.len()
}
