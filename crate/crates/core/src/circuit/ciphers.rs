//! Desk-scale keyed generators. Every family takes only key bits as circuit
//! inputs; IV and plaintext are constants folded into the netlist.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::builder::{NetlistBuilder, Signal};
use super::netlist::CircuitNetlist;
use super::CircuitError;

/// Fibonacci LFSR: `u[i + length] = XOR_{p in taps} u[i + p]`, with the key
/// supplying `u[0..length]`. The output stream is `u[0], u[1], ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LfsrSpec {
    pub length: usize,
    pub taps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeffeSpec {
    /// Exactly three registers: selector, then the two selected streams.
    pub registers: Vec<LfsrSpec>,
    pub output_bits: usize,
}

/// One register of a Trivium-like generator. Position 0 holds the newest bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NlfsrRegister {
    pub length: usize,
    /// Positions XORed into this register's linear term `t`.
    pub out_taps: Vec<usize>,
    /// Positions of the AND pair mixed into the feedback.
    pub and_taps: [usize; 2],
    /// Position in the *next* register (cyclically) that is XORed into the
    /// bit this register feeds forward.
    pub feedback_tap: usize,
}

/// Trivium-shaped keystream generator over `k >= 2` registers. Per clock:
/// `z = XOR_i t_i`, then register `i + 1` receives
/// `t_i ⊕ r_i[a]·r_i[b] ⊕ r_{i+1}[feedback_tap]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriviumSpec {
    pub registers: Vec<NlfsrRegister>,
    pub output_bits: usize,
    /// Clocks discarded before the first output bit.
    #[serde(default)]
    pub warmup: usize,
}

/// Balanced Feistel network, `(L, R) -> (R, L ⊕ rotl(S(R ⊕ k_i), rotation))`.
/// Round key bit `j` of round `i` is key bit `(i * half_bits + j) mod key_bits`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeistelSpec {
    pub half_bits: usize,
    pub key_bits: usize,
    pub rounds: usize,
    pub sbox: Vec<u8>,
    pub rotation: usize,
    /// Known plaintext; bit `j` is `(plaintext >> j) & 1`, `L` is the low half.
    pub plaintext: u64,
}

/// Substitution-permutation network with a PRESENT-style bit permutation
/// (`j -> j * sbox_count mod (w - 1)`, last bit fixed) and a rotating key
/// schedule (`k_i = rotl(key, i * key_rotation)`). A final whitening key
/// follows the last round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpnSpec {
    pub sbox: Vec<u8>,
    pub sbox_count: usize,
    pub rounds: usize,
    pub key_rotation: usize,
    pub plaintext: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CipherSpec {
    Geffe(GeffeSpec),
    TriviumFamily(TriviumSpec),
    ToyFeistel(FeistelSpec),
    ToySpn(SpnSpec),
}

fn invalid(msg: impl Into<String>) -> CircuitError {
    CircuitError::InvalidSpec(msg.into())
}

pub(crate) fn sbox_width(sbox: &[u8]) -> Result<usize, CircuitError> {
    let len = sbox.len();
    if len < 2 || !len.is_power_of_two() || len > 256 {
        return Err(invalid(format!("S-box length {len} is not a power of two in [2, 256]")));
    }
    let mut seen = vec![false; len];
    for &v in sbox {
        let v = v as usize;
        if v >= len || seen[v] {
            return Err(invalid("S-box is not a permutation of its domain"));
        }
        seen[v] = true;
    }
    Ok(len.trailing_zeros() as usize)
}

impl LfsrSpec {
    fn validate(&self) -> Result<(), CircuitError> {
        if self.length == 0 {
            return Err(invalid("LFSR length must be positive"));
        }
        if self.taps.is_empty() {
            return Err(invalid("LFSR needs at least one tap"));
        }
        let mut sorted = self.taps.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.taps.len() {
            return Err(invalid("duplicate LFSR tap"));
        }
        if let Some(&t) = self.taps.iter().find(|&&t| t >= self.length) {
            return Err(invalid(format!("tap {t} outside register of length {}", self.length)));
        }
        Ok(())
    }
}

impl CipherSpec {
    pub fn from_toml(text: &str) -> Result<Self, CircuitError> {
        let spec: CipherSpec =
            toml::from_str(text).map_err(|e| CircuitError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CircuitError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CircuitError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            CipherSpec::Geffe(_) => "geffe",
            CipherSpec::TriviumFamily(_) => "trivium_family",
            CipherSpec::ToyFeistel(_) => "toy_feistel",
            CipherSpec::ToySpn(_) => "toy_spn",
        }
    }

    /// Number of key bits, i.e. circuit inputs.
    pub fn key_bits(&self) -> usize {
        match self {
            CipherSpec::Geffe(g) => g.registers.iter().map(|r| r.length).sum(),
            CipherSpec::TriviumFamily(t) => t.registers.iter().map(|r| r.length).sum(),
            CipherSpec::ToyFeistel(f) => f.key_bits,
            CipherSpec::ToySpn(s) => s.sbox.len().trailing_zeros() as usize * s.sbox_count,
        }
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        match self {
            CipherSpec::Geffe(g) => {
                if g.registers.len() != 3 {
                    return Err(invalid("Geffe generator needs exactly three registers"));
                }
                for r in &g.registers {
                    r.validate()?;
                }
                if g.output_bits == 0 {
                    return Err(invalid("output length must be at least 1"));
                }
            }
            CipherSpec::TriviumFamily(t) => {
                if t.registers.len() < 2 {
                    return Err(invalid("Trivium family needs at least two registers"));
                }
                let k = t.registers.len();
                for (i, r) in t.registers.iter().enumerate() {
                    if r.length < 2 {
                        return Err(invalid("register length must be at least 2"));
                    }
                    if r.out_taps.is_empty() {
                        return Err(invalid("register needs at least one output tap"));
                    }
                    let next_len = t.registers[(i + 1) % k].length;
                    let in_bounds = r.out_taps.iter().chain(r.and_taps.iter()).all(|&p| p < r.length)
                        && r.feedback_tap < next_len;
                    if !in_bounds {
                        return Err(invalid(format!("register {i}: tap outside register bounds")));
                    }
                }
                if t.output_bits == 0 {
                    return Err(invalid("output length must be at least 1"));
                }
            }
            CipherSpec::ToyFeistel(f) => {
                let b = sbox_width(&f.sbox)?;
                if f.half_bits == 0 || f.half_bits % b != 0 {
                    return Err(invalid("half block width must be a positive multiple of the S-box width"));
                }
                if 2 * f.half_bits > 64 {
                    return Err(invalid("block width above 64 bits"));
                }
                if f.key_bits == 0 || f.rounds == 0 {
                    return Err(invalid("key width and round count must be positive"));
                }
                if f.rotation >= f.half_bits {
                    return Err(invalid("rotation must be smaller than the half block"));
                }
                if 2 * f.half_bits < 64 && f.plaintext >> (2 * f.half_bits) != 0 {
                    return Err(invalid("plaintext wider than the block"));
                }
            }
            CipherSpec::ToySpn(s) => {
                let b = sbox_width(&s.sbox)?;
                let w = b * s.sbox_count;
                if s.sbox_count == 0 || w > 64 {
                    return Err(invalid("block width must be in [1, 64] bits"));
                }
                if s.rounds == 0 {
                    return Err(invalid("round count must be positive"));
                }
                if w < 64 && s.plaintext >> w != 0 {
                    return Err(invalid("plaintext wider than the block"));
                }
            }
        }
        Ok(())
    }

    /// Builds the keyed netlist: inputs `k0..k{n-1}` are the key bits, the
    /// outputs are keystream or ciphertext bits.
    pub fn generate(&self) -> Result<CircuitNetlist, CircuitError> {
        self.validate()?;
        let mut b = NetlistBuilder::new();
        let key: Vec<Signal> = (0..self.key_bits()).map(|i| b.input(format!("k{i}"))).collect();
        let outputs = match self {
            CipherSpec::Geffe(g) => geffe(&mut b, g, &key),
            CipherSpec::TriviumFamily(t) => trivium(&mut b, t, &key),
            CipherSpec::ToyFeistel(f) => feistel(&mut b, f, &key),
            CipherSpec::ToySpn(s) => spn(&mut b, s, &key),
        };
        for o in outputs {
            b.output(o);
        }
        b.finish()
    }
}

/// Shorthand for [`CipherSpec::generate`].
pub fn generate_cipher(spec: &CipherSpec) -> Result<CircuitNetlist, CircuitError> {
    spec.generate()
}

fn lfsr_stream(b: &mut NetlistBuilder, spec: &LfsrSpec, init: &[Signal], len: usize) -> Vec<Signal> {
    let mut u: Vec<Signal> = init.to_vec();
    while u.len() < len {
        let i = u.len() - spec.length;
        let taps: Vec<Signal> = spec.taps.iter().map(|&p| u[i + p]).collect();
        let next = b.xor_all(&taps);
        u.push(next);
    }
    u.truncate(len);
    u
}

fn geffe(b: &mut NetlistBuilder, g: &GeffeSpec, key: &[Signal]) -> Vec<Signal> {
    let mut offset = 0;
    let mut streams = Vec::with_capacity(3);
    for r in &g.registers {
        let init = &key[offset..offset + r.length];
        offset += r.length;
        streams.push(lfsr_stream(b, r, init, g.output_bits));
    }
    (0..g.output_bits)
        .map(|i| b.mux(streams[0][i], streams[1][i], streams[2][i]))
        .collect()
}

fn trivium(b: &mut NetlistBuilder, t: &TriviumSpec, key: &[Signal]) -> Vec<Signal> {
    let k = t.registers.len();
    let mut offset = 0;
    let mut regs: Vec<Vec<Signal>> = t
        .registers
        .iter()
        .map(|r| {
            let s = key[offset..offset + r.length].to_vec();
            offset += r.length;
            s
        })
        .collect();
    let mut out = Vec::with_capacity(t.output_bits);
    for clock in 0..t.warmup + t.output_bits {
        let lin: Vec<Signal> = t
            .registers
            .iter()
            .zip(&regs)
            .map(|(spec, state)| {
                let taps: Vec<Signal> = spec.out_taps.iter().map(|&p| state[p]).collect();
                b.xor_all(&taps)
            })
            .collect();
        if clock >= t.warmup {
            out.push(b.xor_all(&lin));
        }
        let mut fed = Vec::with_capacity(k);
        for i in 0..k {
            let spec = &t.registers[i];
            let state = &regs[i];
            let prod = b.and(state[spec.and_taps[0]], state[spec.and_taps[1]]);
            let fb = regs[(i + 1) % k][spec.feedback_tap];
            let x = b.xor(lin[i], prod);
            fed.push(b.xor(x, fb));
        }
        for i in 0..k {
            let target = &mut regs[(i + 1) % k];
            target.pop();
            target.insert(0, fed[i]);
        }
    }
    out
}

/// Applies the S-box through its algebraic normal form, so each output bit is
/// an XOR of AND-monomials shared within one S-box instance.
fn sbox_layer(b: &mut NetlistBuilder, sbox: &[u8], x: &[Signal]) -> Vec<Signal> {
    let width = sbox.len().trailing_zeros() as usize;
    let size = sbox.len();
    let mut anf: Vec<Vec<bool>> = (0..width)
        .map(|o| (0..size).map(|v| (sbox[v] >> o) & 1 == 1).collect())
        .collect();
    for coeffs in anf.iter_mut() {
        for i in 0..width {
            for v in 0..size {
                if v & (1 << i) != 0 {
                    coeffs[v] ^= coeffs[v ^ (1 << i)];
                }
            }
        }
    }
    let mut out = Vec::with_capacity(x.len());
    for chunk in x.chunks(width) {
        let mut monomials: Vec<Option<Signal>> = vec![None; size];
        monomials[0] = Some(Signal::Const(true));
        for u in 1..size {
            let high = usize::BITS as usize - 1 - u.leading_zeros() as usize;
            let rest = monomials[u & !(1 << high)].expect("built in increasing order");
            monomials[u] = Some(b.and(rest, chunk[high]));
        }
        for coeffs in &anf {
            let terms: Vec<Signal> =
                (0..size).filter(|&u| coeffs[u]).map(|u| monomials[u].unwrap()).collect();
            out.push(b.xor_all(&terms));
        }
    }
    out
}

fn rotl(v: &[Signal], r: usize) -> Vec<Signal> {
    let h = v.len();
    let mut out = v.to_vec();
    for (j, &s) in v.iter().enumerate() {
        out[(j + r) % h] = s;
    }
    out
}

fn constant_bits(value: u64, width: usize) -> Vec<Signal> {
    (0..width).map(|j| Signal::Const((value >> j) & 1 == 1)).collect()
}

fn feistel(b: &mut NetlistBuilder, f: &FeistelSpec, key: &[Signal]) -> Vec<Signal> {
    let h = f.half_bits;
    let block = constant_bits(f.plaintext, 2 * h);
    let mut left = block[..h].to_vec();
    let mut right = block[h..].to_vec();
    for round in 0..f.rounds {
        let mixed: Vec<Signal> = (0..h)
            .map(|j| b.xor(right[j], key[(round * h + j) % f.key_bits]))
            .collect();
        let subst = sbox_layer(b, &f.sbox, &mixed);
        let fout = rotl(&subst, f.rotation);
        let new_right: Vec<Signal> = (0..h).map(|j| b.xor(left[j], fout[j])).collect();
        left = std::mem::replace(&mut right, new_right);
    }
    left.extend(right);
    left
}

pub(crate) fn spn_permutation(j: usize, width: usize, sbox_count: usize) -> usize {
    if j == width - 1 {
        j
    } else {
        (j * sbox_count) % (width - 1)
    }
}

fn spn(b: &mut NetlistBuilder, s: &SpnSpec, key: &[Signal]) -> Vec<Signal> {
    let w = key.len();
    let mut x = constant_bits(s.plaintext, w);
    let round_key = |i: usize| rotl(key, (i * s.key_rotation) % w);
    for round in 0..s.rounds {
        let rk = round_key(round);
        let mixed: Vec<Signal> = (0..w).map(|j| b.xor(x[j], rk[j])).collect();
        let subst = sbox_layer(b, &s.sbox, &mixed);
        let mut permuted = subst.clone();
        for (j, &bit) in subst.iter().enumerate() {
            permuted[spn_permutation(j, w, s.sbox_count)] = bit;
        }
        x = permuted;
    }
    let rk = round_key(s.rounds);
    (0..w).map(|j| b.xor(x[j], rk[j])).collect()
}
