//! Logical codes with exact amplitudes and their transversal diagonal action.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitspace::{logical_order, modular_inner_product, BitString, SearchParams, MAX_QUBITS};
use crate::exactnum::{Phase, PhasedRadicalSum, Rational};
use crate::zfeas::ProbabilityTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("malformed code: {0}")]
    Malformed(String),
    #[error("state {j} is not normalized: norm² = {norm}")]
    Norm { j: usize, norm: Rational },
    #[error("state {j} has support string {x} outside residue class {expected} (residue {found})")]
    EigenViolation {
        j: usize,
        x: BitString,
        expected: u32,
        found: u32,
    },
}

/// `e^{2πi·phase} · √radicand`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Amplitude {
    pub phase: Phase,
    pub radicand: Rational,
}

impl Amplitude {
    pub fn new(phase: Phase, radicand: Rational) -> Self {
        Amplitude { phase, radicand }
    }

    pub fn positive(radicand: Rational) -> Self {
        Amplitude::new(Phase::zero(), radicand)
    }

    /// `±√radicand`.
    pub fn signed(negative: bool, radicand: Rational) -> Self {
        let phase = if negative { Phase::half() } else { Phase::zero() };
        Amplitude::new(phase, radicand)
    }

    /// `|a|²`
    pub fn probability(&self) -> &Rational {
        &self.radicand
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let mag = self.radicand.to_f64().sqrt();
        let (re, im) = self.phase.to_complex();
        (mag * re, mag * im)
    }
}

/// Logical basis states `|j_L⟩` on `n` qubits with a residue layout.
///
/// The layout is looser than [`SearchParams`]: weights may be zero or
/// unsorted and several logical states may share a residue, as in the
/// constructive families.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCode")]
pub struct LogicalCode {
    n: usize,
    m: u32,
    weights: Vec<u32>,
    residues: Vec<u32>,
    states: Vec<BTreeMap<BitString, Amplitude>>,
}

#[derive(Deserialize)]
struct RawCode {
    n: usize,
    m: u32,
    weights: Vec<u32>,
    residues: Vec<u32>,
    states: Vec<BTreeMap<BitString, Amplitude>>,
}

impl TryFrom<RawCode> for LogicalCode {
    type Error = CodeError;

    fn try_from(raw: RawCode) -> Result<Self, Self::Error> {
        if raw.n != raw.weights.len() {
            return Err(CodeError::Malformed(format!("n = {} but {} weights", raw.n, raw.weights.len())));
        }
        LogicalCode::new(raw.m, raw.weights, raw.residues, raw.states)
    }
}

impl LogicalCode {
    /// Checks shape and exact unit norm; zero amplitudes are dropped.
    pub fn new(
        m: u32,
        weights: Vec<u32>,
        residues: Vec<u32>,
        states: Vec<BTreeMap<BitString, Amplitude>>,
    ) -> Result<Self, CodeError> {
        let n = weights.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(CodeError::Malformed(format!("qubit count {n}")));
        }
        if m < 2 {
            return Err(CodeError::Malformed(format!("modulus {m}")));
        }
        if weights.iter().any(|&w| w >= m) || residues.iter().any(|&s| s >= m) {
            return Err(CodeError::Malformed("weights and residues must lie below m".into()));
        }
        if residues.is_empty() {
            return Err(CodeError::Malformed("no logical states".into()));
        }
        if residues.len() != states.len() {
            return Err(CodeError::Malformed(format!(
                "{} residues for {} states",
                residues.len(),
                states.len()
            )));
        }
        let mut cleaned = Vec::with_capacity(states.len());
        for (j, state) in states.into_iter().enumerate() {
            let mut out = BTreeMap::new();
            for (x, a) in state {
                if x.len() != n {
                    return Err(CodeError::Malformed(format!("state {j}: string {x} has length {}", x.len())));
                }
                if a.radicand.is_negative() {
                    return Err(CodeError::Malformed(format!("state {j}: negative radicand at {x}")));
                }
                if !a.radicand.is_zero() {
                    out.insert(x, a);
                }
            }
            let norm: Rational = out.values().map(Amplitude::probability).sum();
            if !norm.is_one() {
                return Err(CodeError::Norm { j, norm });
            }
            cleaned.push(out);
        }
        Ok(LogicalCode {
            n,
            m,
            weights,
            residues,
            states: cleaned,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.states.len()
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

    pub fn states(&self) -> &[BTreeMap<BitString, Amplitude>] {
        &self.states
    }

    pub fn state(&self, j: usize) -> &BTreeMap<BitString, Amplitude> {
        &self.states[j]
    }

    /// Total number of nonzero amplitudes.
    pub fn amplitude_count(&self) -> usize {
        self.states.iter().map(BTreeMap::len).sum()
    }

    /// Canonical parameters, when the layout is canonical.
    pub fn params(&self) -> Option<SearchParams> {
        SearchParams::new(self.m, self.weights.clone(), self.residues.clone()).ok()
    }

    /// `⟨j|k⟩` exactly.
    pub fn inner_product(&self, j: usize, k: usize) -> PhasedRadicalSum {
        let mut acc = PhasedRadicalSum::new();
        for (x, a) in &self.states[j] {
            if let Some(b) = self.states[k].get(x) {
                acc.add_term(&Rational::one(), b.phase.add(&a.phase.conj()), &(&a.radicand * &b.radicand))
                    .expect("nonnegative radicands");
            }
        }
        acc
    }

    /// `‖U|j⟩ − ω^{S_j}|j⟩‖` would vanish: every support string has residue `S_j`.
    fn eigen_violation(&self) -> Option<CodeError> {
        for (j, state) in self.states.iter().enumerate() {
            for x in state.keys() {
                let r = modular_inner_product(&self.weights, x, self.m).expect("validated shape");
                if r != self.residues[j] {
                    return Some(CodeError::EigenViolation {
                        j,
                        x: *x,
                        expected: self.residues[j],
                        found: r,
                    });
                }
            }
        }
        None
    }
}

/// `|j_L⟩ = Σ_x √p_{j,x} |x⟩` with all phases `+1`.
pub fn assemble(params: &SearchParams, probs: &ProbabilityTable) -> Result<LogicalCode, CodeError> {
    if probs.k() != params.k() {
        return Err(CodeError::Malformed(format!(
            "table has {} blocks, parameters have K = {}",
            probs.k(),
            params.k()
        )));
    }
    let states = probs
        .blocks()
        .iter()
        .map(|block| {
            block
                .iter()
                .filter(|(_, p)| !p.is_zero())
                .map(|(x, p)| (*x, Amplitude::positive(p.clone())))
                .collect()
        })
        .collect();
    LogicalCode::new(params.m(), params.weights().to_vec(), params.residues().to_vec(), states)
}

/// The logical gate induced by `U(w, m) = ⊗ diag(1, ω_m^{wᵢ})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalAction {
    pub m: u32,
    pub residues: Vec<u32>,
    pub phases: Vec<Phase>,
    pub order: u32,
}

impl TransversalAction {
    pub fn from_residues(m: u32, residues: &[u32]) -> Self {
        TransversalAction {
            m,
            residues: residues.to_vec(),
            phases: residues
                .iter()
                .map(|&s| Phase::root_of_unity(s as u64, m as u64))
                .collect(),
            order: logical_order(m, residues),
        }
    }
}

impl fmt::Display for TransversalAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = self
            .phases
            .iter()
            .zip(&self.residues)
            .map(|(p, s)| match (p.num(), p.den()) {
                (0, _) => "1".to_string(),
                (1, 2) => "-1".to_string(),
                (1, 4) => "i".to_string(),
                (3, 4) => "-i".to_string(),
                _ => format!("ω{}^{}", self.m, s),
            })
            .collect();
        write!(f, "diag({})", entries.join(", "))
    }
}

/// Eigenphases and order, after an exact residue check of every support string.
pub fn transversal_action(code: &LogicalCode) -> Result<TransversalAction, CodeError> {
    if let Some(err) = code.eigen_violation() {
        return Err(err);
    }
    Ok(TransversalAction::from_residues(code.m, &code.residues))
}

/// `⟨Zᵢ⟩_j = Σ_x (1 − 2xᵢ)|a_{j,x}|²`.
pub fn z_expectations(code: &LogicalCode) -> Vec<Vec<Rational>> {
    code.states
        .iter()
        .map(|state| {
            (0..code.n)
                .map(|i| {
                    let mut acc = Rational::zero();
                    for (x, a) in state {
                        if x.bit(i) {
                            acc -= &a.radicand;
                        } else {
                            acc += &a.radicand;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}
