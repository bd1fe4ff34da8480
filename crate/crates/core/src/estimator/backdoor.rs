use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::EstimatorError;
use crate::cnf::Var;

/// A subset `B` of the input variables, as its characteristic vector `χ`
/// over the ordered input list (`χ_i = 1` iff `x_i ∈ B`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BackdoorSet {
    chi: Vec<bool>,
}

impl BackdoorSet {
    pub fn new(chi: Vec<bool>) -> Self {
        BackdoorSet { chi }
    }

    /// `B = X`, the point `1^n`.
    pub fn full(n: usize) -> Self {
        BackdoorSet { chi: vec![true; n] }
    }

    pub fn empty(n: usize) -> Self {
        BackdoorSet { chi: vec![false; n] }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut chi = vec![false; n];
        for &i in indices {
            chi[i] = true;
        }
        BackdoorSet { chi }
    }

    pub fn chi(&self) -> &[bool] {
        &self.chi
    }

    /// `n`, the number of input variables.
    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    /// `s = |B|`.
    pub fn size(&self) -> usize {
        self.chi.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.chi.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.chi[i]
    }

    pub fn with_flipped(&self, i: usize) -> Self {
        let mut chi = self.chi.clone();
        chi[i] = !chi[i];
        BackdoorSet { chi }
    }

    pub fn hamming_distance(&self, other: &BackdoorSet) -> usize {
        self.chi.iter().zip(&other.chi).filter(|(a, b)| a != b).count()
    }

    /// The variables of `B`, given the ordered input list `X`.
    pub fn variables(&self, inputs: &[Var]) -> Vec<Var> {
        assert_eq!(inputs.len(), self.chi.len(), "χ length does not match |X|");
        self.indices().map(|i| inputs[i]).collect()
    }

    /// `β(α)`: the bits of `α` at the positions in `B`.
    pub fn project(&self, alpha: &[bool]) -> Vec<bool> {
        self.indices().map(|i| alpha[i]).collect()
    }

    /// Hex form: nibble `k` carries `χ[4k..4k+4]`, most significant bit
    /// first; the tail is zero-padded.
    pub fn to_hex(&self) -> String {
        self.chi
            .chunks(4)
            .map(|c| {
                let v = c.iter().enumerate().fold(0u32, |acc, (j, &b)| acc | ((b as u32) << (3 - j)));
                char::from_digit(v, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(hex: &str, n: usize) -> Result<Self, EstimatorError> {
        let bad = |m: &str| EstimatorError::InvalidChi(format!("{hex:?}: {m}"));
        if hex.chars().count() != n.div_ceil(4) {
            return Err(bad(&format!("expected {} hex digits for n = {n}", n.div_ceil(4))));
        }
        let mut chi = Vec::with_capacity(n);
        for c in hex.chars() {
            let v = c.to_digit(16).ok_or_else(|| bad("not a hex digit"))?;
            for j in 0..4 {
                chi.push((v >> (3 - j)) & 1 == 1);
            }
        }
        if chi[n..].iter().any(|&b| b) {
            return Err(bad("padding bits must be zero"));
        }
        chi.truncate(n);
        Ok(BackdoorSet { chi })
    }

    pub fn to_bitstring(&self) -> String {
        self.chi.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Accepts `ones`/`all`, `zeros`/`none`, a `0b`-prefixed or bare bit
    /// string of length `n`, a `0x`-prefixed hex string, or a comma list of
    /// indices prefixed with `idx:`.
    pub fn parse(text: &str, n: usize) -> Result<Self, EstimatorError> {
        let t = text.trim();
        let bad = |m: String| EstimatorError::InvalidChi(m);
        match t {
            "ones" | "all" => return Ok(Self::full(n)),
            "zeros" | "none" => return Ok(Self::empty(n)),
            _ => {}
        }
        if let Some(hex) = t.strip_prefix("0x") {
            return Self::from_hex(hex, n);
        }
        if let Some(list) = t.strip_prefix("idx:") {
            let mut chi = vec![false; n];
            for tok in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let i: usize = tok.parse().map_err(|_| bad(format!("bad index {tok:?}")))?;
                if i >= n {
                    return Err(bad(format!("index {i} out of range for n = {n}")));
                }
                chi[i] = true;
            }
            return Ok(BackdoorSet { chi });
        }
        let bits = t.strip_prefix("0b").unwrap_or(t);
        if bits.len() != n {
            return Err(bad(format!("bit string has length {}, expected {n}", bits.len())));
        }
        bits.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(bad(format!("unexpected character {c:?} in bit string"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BackdoorSet::new)
    }
}

impl fmt::Display for BackdoorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

impl FromStr for BackdoorSet {
    type Err = EstimatorError;

    /// Bit strings only; the length defines `n`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Self::parse(s, s.strip_prefix("0b").unwrap_or(s).len())
    }
}

/// Serialized as the bit string.
impl Serialize for BackdoorSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bitstring())
    }
}

impl<'de> Deserialize<'de> for BackdoorSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_layout() {
        assert_eq!(BackdoorSet::full(12).to_hex(), "fff");
        assert_eq!(BackdoorSet::full(6).to_hex(), "fc");
        let b = BackdoorSet::from_indices(6, &[0, 5]);
        assert_eq!(b.to_hex(), "84");
        assert_eq!(BackdoorSet::from_hex("84", 6).unwrap(), b);
        assert!(BackdoorSet::from_hex("fd", 6).is_err());
        assert!(BackdoorSet::from_hex("f", 6).is_err());
    }

    #[test]
    fn parse_forms() {
        let b = BackdoorSet::parse("0b101", 3).unwrap();
        assert_eq!(b.chi(), &[true, false, true]);
        assert_eq!(BackdoorSet::parse("101", 3).unwrap(), b);
        assert_eq!(BackdoorSet::parse("idx:0,2", 3).unwrap(), b);
        assert_eq!(BackdoorSet::parse("0xa", 3).unwrap(), b);
        assert_eq!(BackdoorSet::parse("ones", 3).unwrap(), BackdoorSet::full(3));
        assert!(BackdoorSet::parse("10", 3).is_err());
        assert!(BackdoorSet::parse("1x1", 3).is_err());
        assert!(BackdoorSet::parse("idx:3", 3).is_err());
    }

    #[test]
    fn size_and_projection() {
        let b = BackdoorSet::from_indices(5, &[1, 3]);
        assert_eq!(b.size(), 2);
        assert_eq!(b.project(&[true, false, true, true, false]), vec![false, true]);
        assert_eq!(b.variables(&[Var(1), Var(2), Var(3), Var(4), Var(5)]), vec![Var(2), Var(4)]);
        assert_eq!(b.hamming_distance(&BackdoorSet::full(5)), 3);
    }
}
