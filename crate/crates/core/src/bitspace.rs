//! Bit strings, modular inner products and subset-sum residue classes.
//!
//! Sites are numbered from the left: site 0 is the first character of the
//! textual form (conventionally `x₁`) and is stored as the most significant
//! bit, so numeric order on same-length strings equals lexicographic order.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("length mismatch: weights have {weights} entries, string has {bits}")]
    Dimension { weights: usize, bits: usize },
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    Length(usize),
    #[error("invalid bit string `{0}`")]
    Parse(String),
    #[error("invalid parameters: {0}")]
    Params(String),
}

/// A fixed-length binary string.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: u8,
    bits: u32,
}

impl BitString {
    /// From the integer whose binary expansion (MSB = site 0) is the string.
    pub fn from_index(len: usize, bits: u32) -> Result<Self, BitError> {
        if len == 0 || len > MAX_QUBITS {
            return Err(BitError::Length(len));
        }
        if len < 32 && bits >> len != 0 {
            return Err(BitError::Parse(format!("{bits:#b} does not fit in {len} bits")));
        }
        Ok(BitString { len: len as u8, bits })
    }

    pub fn zeros(len: usize) -> Self {
        BitString::from_index(len, 0).expect("valid length")
    }

    pub fn ones(len: usize) -> Self {
        BitString::from_index(len, (1u32 << len) - 1).expect("valid length")
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self) -> u32 {
        self.bits
    }

    fn mask(&self, site: usize) -> u32 {
        debug_assert!(site < self.len());
        1 << (self.len() - 1 - site)
    }

    /// Bit at `site` (0-based from the left).
    pub fn bit(&self, site: usize) -> bool {
        self.bits & self.mask(site) != 0
    }

    /// `x ⊕ e_site`
    pub fn flip(&self, site: usize) -> Self {
        BitString {
            len: self.len,
            bits: self.bits ^ self.mask(site),
        }
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn distance(&self, other: &BitString) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }

    /// All `2^len` strings in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        assert!((1..=MAX_QUBITS).contains(&len));
        (0..1u32 << len).map(move |bits| BitString { len: len as u8, bits })
    }

    pub fn concat(&self, other: &BitString) -> Result<BitString, BitError> {
        BitString::from_index(self.len() + other.len(), (self.bits << other.len) | other.bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter_bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for BitString {
    type Err = BitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || s.len() > MAX_QUBITS {
            return Err(BitError::Parse(s.to_string()));
        }
        let mut bits = 0u32;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(BitError::Parse(s.to_string())),
                };
        }
        BitString::from_index(s.len(), bits)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `Σ wᵢ xᵢ mod m`.
pub fn modular_inner_product(weights: &[u32], x: &BitString, m: u32) -> Result<u32, BitError> {
    if weights.len() != x.len() {
        return Err(BitError::Dimension {
            weights: weights.len(),
            bits: x.len(),
        });
    }
    if m < 2 {
        return Err(BitError::Params(format!("modulus {m} must be at least 2")));
    }
    Ok(residue_unchecked(weights, x, m))
}

fn residue_unchecked(weights: &[u32], x: &BitString, m: u32) -> u32 {
    let sum: u64 = weights
        .iter()
        .enumerate()
        .filter(|&(i, _)| x.bit(i))
        .map(|(_, &w)| w as u64)
        .sum();
    (sum % m as u64) as u32
}

/// `((−1)^{x₁}, …, (−1)^{xₙ})`
pub fn sign_vector(x: &BitString) -> Vec<i8> {
    x.iter_bits().map(|b| if b { -1 } else { 1 }).collect()
}

/// One SSLP candidate `(n, K, m, w, S)` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SearchParams {
    n: usize,
    m: u32,
    weights: Vec<u32>,
    residues: Vec<u32>,
}

#[derive(Deserialize)]
struct RawParams {
    n: usize,
    m: u32,
    weights: Vec<u32>,
    residues: Vec<u32>,
}

impl TryFrom<RawParams> for SearchParams {
    type Error = BitError;

    fn try_from(raw: RawParams) -> Result<Self, BitError> {
        if raw.n != raw.weights.len() {
            return Err(BitError::Dimension {
                weights: raw.weights.len(),
                bits: raw.n,
            });
        }
        SearchParams::new(raw.m, raw.weights, raw.residues)
    }
}

impl SearchParams {
    /// Validates: `w` nondecreasing in `[1, m−1]`, `S₀ = 0`, `S` strictly
    /// increasing below `m`.
    pub fn new(m: u32, weights: Vec<u32>, residues: Vec<u32>) -> Result<Self, BitError> {
        let n = weights.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(BitError::Length(n));
        }
        if m < 2 {
            return Err(BitError::Params(format!("modulus {m} must be at least 2")));
        }
        if weights.iter().any(|&w| w == 0 || w >= m) {
            return Err(BitError::Params(format!("weights {weights:?} must lie in [1, {}]", m - 1)));
        }
        if weights.windows(2).any(|p| p[0] > p[1]) {
            return Err(BitError::Params(format!("weights {weights:?} must be nondecreasing")));
        }
        if residues.first() != Some(&0) {
            return Err(BitError::Params(format!("residues {residues:?} must start at 0")));
        }
        if residues.windows(2).any(|p| p[0] >= p[1]) || residues.iter().any(|&s| s >= m) {
            return Err(BitError::Params(format!(
                "residues {residues:?} must be strictly increasing below {m}"
            )));
        }
        Ok(SearchParams { n, m, weights, residues })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.residues.len()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn residues(&self) -> &[u32] {
        &self.residues
    }

    pub fn residue_of(&self, x: &BitString) -> u32 {
        residue_unchecked(&self.weights, x, self.m)
    }

    /// Classes `C_{S_j}` for every logical index, in order.
    pub fn classes(&self) -> Vec<ResidueClass> {
        let mut buckets: Vec<Vec<BitString>> = vec![Vec::new(); self.m as usize];
        for x in BitString::all(self.n) {
            buckets[self.residue_of(&x) as usize].push(x);
        }
        self.residues
            .iter()
            .map(|&s| ResidueClass {
                residue: s,
                members: std::mem::take(&mut buckets[s as usize]),
            })
            .collect()
    }

    /// `m / gcd(m, S₁, …, S_{K−1})`
    pub fn order(&self) -> u32 {
        logical_order(self.m, &self.residues)
    }
}

/// Projective order of `diag(ω_m^{S_j})`: `m / gcd(m, S_j − S₀ …)`.
pub fn logical_order(m: u32, residues: &[u32]) -> u32 {
    let base = residues.first().copied().unwrap_or(0);
    let g = residues
        .iter()
        .map(|&s| (s + m - base % m) % m)
        .fold(m, |acc, d| acc.gcd(&d));
    m / g
}

impl fmt::Display for SearchParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} K={} m={} w={:?} S={:?}",
            self.n,
            self.k(),
            self.m,
            self.weights,
            self.residues
        )
    }
}

/// All strings with one residue, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueClass {
    pub residue: u32,
    pub members: Vec<BitString>,
}

impl ResidueClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.members.binary_search(x).is_ok()
    }
}

/// `C_residue(w)` for the parameters' `(n, w, m)`.
pub fn residue_class(params: &SearchParams, residue: u32) -> Result<ResidueClass, BitError> {
    if residue >= params.m {
        return Err(BitError::Params(format!("residue {residue} not below {}", params.m)));
    }
    let members = BitString::all(params.n)
        .filter(|x| params.residue_of(x) == residue)
        .collect();
    Ok(ResidueClass { residue, members })
}

/// Minimum Hamming distance over distinct pairs, or `NoPair` for fewer than two strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum UnionDistance {
    Finite(u32),
    NoPair,
}

impl UnionDistance {
    pub fn at_least(&self, d: u32) -> bool {
        match self {
            UnionDistance::Finite(v) => *v >= d,
            UnionDistance::NoPair => true,
        }
    }
}

impl fmt::Display for UnionDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnionDistance::Finite(d) => write!(f, "{d}"),
            UnionDistance::NoPair => write!(f, "inf"),
        }
    }
}

/// Minimum distance of `⋃ classes`.
///
/// Uses a membership bitmap over `{0,1}ⁿ`: distance 1 and 2 are detected by
/// probing single and double flips, larger distances fall back to all pairs.
pub fn union_distance(classes: &[ResidueClass]) -> UnionDistance {
    let members: Vec<BitString> = classes.iter().flat_map(|c| c.members.iter().copied()).collect();
    distance_of_set(&members)
}

/// Minimum distance of an arbitrary string set (duplicates ignored).
pub fn distance_of_set(members: &[BitString]) -> UnionDistance {
    let Some(first) = members.first() else {
        return UnionDistance::NoPair;
    };
    let n = first.len();
    let mut seen = vec![false; 1usize << n];
    let mut unique = Vec::with_capacity(members.len());
    for x in members {
        if !seen[x.index() as usize] {
            seen[x.index() as usize] = true;
            unique.push(*x);
        }
    }
    if unique.len() < 2 {
        return UnionDistance::NoPair;
    }
    let mut best = u32::MAX;
    for x in &unique {
        for i in 0..n {
            if seen[x.flip(i).index() as usize] {
                return UnionDistance::Finite(1);
            }
        }
    }
    for x in &unique {
        for i in 0..n {
            for j in i + 1..n {
                if seen[x.flip(i).flip(j).index() as usize] {
                    best = 2;
                }
            }
        }
        if best == 2 {
            return UnionDistance::Finite(2);
        }
    }
    for (a, x) in unique.iter().enumerate() {
        for y in &unique[a + 1..] {
            best = best.min(x.distance(y));
        }
    }
    UnionDistance::Finite(best)
}
