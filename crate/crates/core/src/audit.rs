//! Independent verification of a logical code.
//!
//! Everything here is recomputed from the code's amplitudes and layout: the
//! residues of support strings, the single-flip neighbor structure, and every
//! matrix element `⟨j|P|k⟩` for `P ∈ {Xᵢ, Yᵢ, Zᵢ}`. Nothing is taken from the
//! search side, so a bug in the builder cannot hide itself here.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitspace::BitString;
use crate::codes::{Amplitude, LogicalCode};
use crate::exactnum::{Phase, PhasedRadicalSum, Rational, ZeroTest};

pub const DEFAULT_TAU: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    Float,
    Rational,
}

/// Tolerance applies to float mode only; rational mode compares exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditConfig {
    pub tau_float: f64,
    pub mode: AuditMode,
}

impl AuditConfig {
    pub fn rational() -> Self {
        AuditConfig {
            tau_float: DEFAULT_TAU,
            mode: AuditMode::Rational,
        }
    }

    pub fn float(tau: f64) -> Self {
        AuditConfig {
            tau_float: tau,
            mode: AuditMode::Float,
        }
    }
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig::rational()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    /// Orthonormality: `⟨j|k⟩ = δ_jk`. Reported with site 0.
    I,
    X,
    Y,
    Z,
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

/// Pass, fail, or an exact value whose sign of zero could not be decided.
/// `Undecided` never counts as a pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Measured {
    Exact(PhasedRadicalSum),
    Float(f64, f64),
}

impl fmt::Display for Measured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measured::Exact(v) => write!(f, "{v}"),
            Measured::Float(re, im) => write!(f, "{re:+.3e}{im:+.3e}i"),
        }
    }
}

/// One KL condition. For `j < k` the value is `⟨j|P|k⟩`, which must vanish;
/// for `j = k > 0` it is `⟨j|P|j⟩ − ⟨0|P|0⟩`, which must vanish too.
#[derive(Clone, Debug, PartialEq)]
pub struct KlEntry {
    pub pauli: Pauli,
    /// 1-based site; 0 for the identity.
    pub site: usize,
    pub j: usize,
    pub k: usize,
    pub value: Measured,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KlReport {
    pub mode: AuditMode,
    pub entries: Vec<KlEntry>,
    /// Hamming-1 pairs that contributed to some X or Y element.
    pub neighbor_pairs: usize,
    /// `⟨0|P_i|0⟩` for P = X, Y, Z, indexed by site, when every check passed.
    pub lambdas: Option<BTreeMap<Pauli, Vec<Measured>>>,
}

impl KlReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.verdict.passed())
    }

    pub fn failures(&self) -> impl Iterator<Item = &KlEntry> {
        self.entries.iter().filter(|e| !e.verdict.passed())
    }

    /// Exact common Z expectations, in rational mode.
    pub fn lambda_z(&self) -> Option<Vec<Rational>> {
        self.lambdas.as_ref()?[&Pauli::Z]
            .iter()
            .map(|v| match v {
                Measured::Exact(s) => s.split_quarter_turns().and_then(|(re, im)| {
                    if im.is_zero() {
                        re.as_rational()
                    } else {
                        None
                    }
                }),
                Measured::Float(..) => None,
            })
            .collect()
    }
}

/// Per-state result of the transversal eigen-check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalEntry {
    pub j: usize,
    pub residue: u32,
    pub passed: bool,
    /// First support string whose residue differs from the state's.
    pub offending: Option<BitString>,
    /// `‖U|j⟩ − ω^{S_j}|j⟩‖` in float mode.
    pub residual_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalReport {
    pub mode: AuditMode,
    pub entries: Vec<TransversalEntry>,
}

impl TransversalReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    /// Set when the input cannot be audited at all.
    pub malformed: Option<String>,
    pub float_kl: Option<KlReport>,
    pub rational_kl: Option<KlReport>,
    pub transversal: Option<TransversalReport>,
}

impl AuditReport {
    fn rejected(reason: String) -> Self {
        AuditReport {
            malformed: Some(reason),
            float_kl: None,
            rational_kl: None,
            transversal: None,
        }
    }

    pub fn accepted(&self) -> bool {
        self.malformed.is_none()
            && [self.float_kl.as_ref(), self.rational_kl.as_ref()]
                .iter()
                .all(|r| r.is_some_and(KlReport::passed))
            && self.transversal.as_ref().is_some_and(TransversalReport::passed)
    }

    pub fn summary(&self) -> AuditSummary {
        AuditSummary {
            accepted: self.accepted(),
            float_kl: self.float_kl.as_ref().is_some_and(KlReport::passed),
            rational_kl: self.rational_kl.as_ref().is_some_and(KlReport::passed),
            transversal: self.transversal.as_ref().is_some_and(TransversalReport::passed),
            lambda_z: self.rational_kl.as_ref().and_then(KlReport::lambda_z),
        }
    }

    /// One line per failed check, for human review.
    pub fn failure_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(reason) = &self.malformed {
            out.push(format!("malformed: {reason}"));
        }
        for report in [&self.float_kl, &self.rational_kl].into_iter().flatten() {
            for e in report.failures() {
                out.push(format!(
                    "{:?} {}{} <{}|.|{}> = {} ({:?})",
                    report.mode, e.pauli, e.site, e.j, e.k, e.value, e.verdict
                ));
            }
        }
        if let Some(t) = &self.transversal {
            for e in t.entries.iter().filter(|e| !e.passed) {
                match e.offending {
                    Some(x) => out.push(format!("transversal: state {} has {x} outside residue {}", e.j, e.residue)),
                    None => out.push(format!("transversal: state {} residual {:?}", e.j, e.residual_norm)),
                }
            }
        }
        out
    }
}

/// Compact verdict stored alongside catalog records.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub accepted: bool,
    pub float_kl: bool,
    pub rational_kl: bool,
    pub transversal: bool,
    pub lambda_z: Option<Vec<Rational>>,
}

fn residue(weights: &[u32], x: &BitString, m: u32) -> u32 {
    let total: u64 = x
        .iter_bits()
        .zip(weights)
        .filter(|(b, _)| *b)
        .map(|(_, &w)| u64::from(w))
        .sum();
    (total % u64::from(m)) as u32
}

/// Accumulates `⟨j|P|k⟩` either exactly or in floats.
enum Acc {
    Exact(PhasedRadicalSum),
    Float(f64, f64),
}

impl Acc {
    fn new(mode: AuditMode) -> Self {
        match mode {
            AuditMode::Rational => Acc::Exact(PhasedRadicalSum::new()),
            AuditMode::Float => Acc::Float(0.0, 0.0),
        }
    }

    /// Adds `sign · e^{2πi·extra} · conj(a) · b`.
    fn add(&mut self, a: &Amplitude, b: &Amplitude, extra: Phase, negative: bool) {
        let phase = b.phase.add(&a.phase.conj()).add(&extra);
        match self {
            Acc::Exact(sum) => {
                let coef = if negative { -Rational::one() } else { Rational::one() };
                sum.add_term(&coef, phase, &(&a.radicand * &b.radicand))
                    .expect("nonnegative radicands");
            }
            Acc::Float(re, im) => {
                let mag = (a.radicand.to_f64() * b.radicand.to_f64()).sqrt();
                let mag = if negative { -mag } else { mag };
                let (s, c) = phase.angle().sin_cos();
                *re += mag * c;
                *im += mag * s;
            }
        }
    }

    fn minus(self, other: &Acc) -> Acc {
        match (self, other) {
            (Acc::Exact(mut a), Acc::Exact(b)) => {
                a.subtract(b);
                Acc::Exact(a)
            }
            (Acc::Float(a, b), Acc::Float(c, d)) => Acc::Float(a - c, b - d),
            _ => unreachable!("modes never mix"),
        }
    }

    fn verdict(&self, tau: f64) -> Verdict {
        match self {
            Acc::Exact(sum) => match sum.zero_test() {
                ZeroTest::Zero => Verdict::Pass,
                ZeroTest::NonZero => Verdict::Fail,
                ZeroTest::Undecided => Verdict::Undecided,
            },
            Acc::Float(re, im) => {
                if re.hypot(*im) <= tau {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
        }
    }

    fn measured(self) -> Measured {
        match self {
            Acc::Exact(s) => Measured::Exact(s),
            Acc::Float(re, im) => Measured::Float(re, im),
        }
    }
}

/// `⟨j|P_site|k⟩`, counting contributing flip pairs for X and Y.
fn element(code: &LogicalCode, mode: AuditMode, pauli: Pauli, site: usize, j: usize, k: usize, pairs: &mut usize) -> Acc {
    let bra = code.state(j);
    let ket = code.state(k);
    let mut acc = Acc::new(mode);
    match pauli {
        Pauli::I => {
            for (y, b) in ket {
                if let Some(a) = bra.get(y) {
                    acc.add(a, b, Phase::zero(), false);
                }
            }
        }
        Pauli::Z => {
            for (y, b) in ket {
                if let Some(a) = bra.get(y) {
                    acc.add(a, b, Phase::zero(), y.bit(site));
                }
            }
        }
        Pauli::X | Pauli::Y => {
            for (y, b) in ket {
                let flipped = y.flip(site);
                if let Some(a) = bra.get(&flipped) {
                    *pairs += 1;
                    // Y|y⟩ = i(−1)^{y_site}|y ⊕ e_site⟩
                    let (extra, negative) = match pauli {
                        Pauli::X => (Phase::zero(), false),
                        _ => (Phase::quarter(), y.bit(site)),
                    };
                    acc.add(a, b, extra, negative);
                }
            }
        }
    }
    acc
}

/// Orthonormality plus every weight-1 KL condition: off-diagonals vanish and
/// diagonals agree.
pub fn kl_check(code: &LogicalCode, config: &AuditConfig) -> KlReport {
    let mode = config.mode;
    let mut entries = Vec::new();
    let mut pairs = 0;
    let mut lambdas: BTreeMap<Pauli, Vec<Measured>> = BTreeMap::new();
    for pauli in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
        let sites = if pauli == Pauli::I { 1 } else { code.n() };
        for site in 0..sites {
            let base = element(code, mode, pauli, site, 0, 0, &mut pairs);
            for j in 0..code.k() {
                for k in j..code.k() {
                    if j == 0 && k == 0 {
                        continue;
                    }
                    let value = if j == k {
                        element(code, mode, pauli, site, j, j, &mut pairs).minus(&base)
                    } else {
                        element(code, mode, pauli, site, j, k, &mut pairs)
                    };
                    let verdict = value.verdict(config.tau_float);
                    entries.push(KlEntry {
                        pauli,
                        site: if pauli == Pauli::I { 0 } else { site + 1 },
                        j,
                        k,
                        value: value.measured(),
                        verdict,
                    });
                }
            }
            lambdas.entry(pauli).or_default().push(base.measured());
        }
    }
    let passed = entries.iter().all(|e| e.verdict.passed());
    KlReport {
        mode,
        entries,
        neighbor_pairs: pairs,
        lambdas: passed.then_some(lambdas),
    }
}

/// `U(w, m)|j⟩ = ω_m^{S_j}|j⟩` for every state.
///
/// Rational mode checks each support string's residue as an integer; float
/// mode forms the phase-multiplied state and bounds the residual norm.
pub fn transversal_check(code: &LogicalCode, config: &AuditConfig) -> TransversalReport {
    let m = code.m();
    let entries = code
        .states()
        .iter()
        .enumerate()
        .map(|(j, state)| {
            let target = code.residues()[j];
            match config.mode {
                AuditMode::Rational => {
                    let offending = state.keys().find(|x| residue(code.weights(), x, m) != target).copied();
                    TransversalEntry {
                        j,
                        residue: target,
                        passed: offending.is_none(),
                        offending,
                        residual_norm: None,
                    }
                }
                AuditMode::Float => {
                    let mut norm2 = 0.0;
                    for (x, a) in state {
                        let r = residue(code.weights(), x, m);
                        let diff = 2.0 * std::f64::consts::PI * (f64::from(r) - f64::from(target)) / f64::from(m);
                        // |e^{iθ} − 1|² |a|²
                        norm2 += (2.0 - 2.0 * diff.cos()) * a.radicand.to_f64();
                    }
                    let norm = norm2.max(0.0).sqrt();
                    TransversalEntry {
                        j,
                        residue: target,
                        passed: norm <= config.tau_float,
                        offending: None,
                        residual_norm: Some(norm),
                    }
                }
            }
        })
        .collect();
    TransversalReport {
        mode: config.mode,
        entries,
    }
}

/// Float KL, exact KL and the exact transversal check; accept iff all pass.
/// `config.tau_float` is used by the float pass.
pub fn full_audit(code: &LogicalCode, config: &AuditConfig) -> AuditReport {
    if code.k() == 0 {
        return AuditReport::rejected("code has no logical states".into());
    }
    if code.states().iter().any(|s| s.is_empty()) {
        return AuditReport::rejected("a logical state has empty support".into());
    }
    let float = AuditConfig::float(config.tau_float);
    AuditReport {
        malformed: None,
        float_kl: Some(kl_check(code, &float)),
        rational_kl: Some(kl_check(code, &AuditConfig::rational())),
        transversal: Some(transversal_check(code, &AuditConfig::rational())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitspace::SearchParams;
    use crate::codes::assemble;
    use crate::zfeas::build_lp;

    fn worked(p0: [i64; 3], den0: i64) -> LogicalCode {
        let params = SearchParams::new(7, vec![1, 1, 2, 2, 2], vec![0, 4]).unwrap();
        let lp = build_lp(&params.classes()).unwrap();
        let mut p: Vec<Rational> = p0.iter().map(|&v| Rational::new(v, den0)).collect();
        p.extend([1, 1, 3, 2, 0, 0].iter().map(|&v| Rational::new(v, 7)));
        assemble(&params, &lp.table_from_vector(&p)).unwrap()
    }

    #[test]
    fn worked_example_passes() {
        let code = worked([3, 2, 2], 7);
        let report = full_audit(&code, &AuditConfig::default());
        assert!(report.accepted(), "{:?}", report.failure_lines());
        let exact = report.rational_kl.as_ref().unwrap();
        assert_eq!(exact.neighbor_pairs, 0);
        let expected: Vec<Rational> = [3, 3, -1, -1, -1].iter().map(|&v| Rational::new(v, 7)).collect();
        assert_eq!(exact.lambda_z(), Some(expected.clone()));
        let lambdas = exact.lambdas.as_ref().unwrap();
        for p in [Pauli::X, Pauli::Y] {
            assert!(lambdas[&p].iter().all(|v| matches!(v, Measured::Exact(s) if s.is_empty())));
        }
        assert_eq!(report.summary().lambda_z, Some(expected));
    }

    #[test]
    fn broken_matching_fails_on_z() {
        let code = worked([2, 1, 1], 4);
        let report = full_audit(&code, &AuditConfig::default());
        assert!(!report.accepted());
        let exact = report.rational_kl.as_ref().unwrap();
        assert!(exact.failures().all(|e| e.pauli == Pauli::Z && e.j == 1 && e.k == 1));
        assert!(exact.failures().count() > 0);
        assert!(!report.float_kl.as_ref().unwrap().passed());
        assert!(report.transversal.as_ref().unwrap().passed());
    }

    #[test]
    fn sign_on_isolated_support_is_a_gauge() {
        // with disjoint, distance-2 supports no matrix element sees relative phases
        let code = worked([3, 2, 2], 7);
        let mut states = code.states().to_vec();
        let x: BitString = "00000".parse().unwrap();
        let a = states[0][&x].clone();
        states[0].insert(x, Amplitude::signed(true, a.radicand));
        let flipped = LogicalCode::new(7, code.weights().to_vec(), code.residues().to_vec(), states).unwrap();
        assert!(full_audit(&flipped, &AuditConfig::default()).accepted());
    }

    #[test]
    fn float_transversal_detects_wrong_class() {
        let code = worked([3, 2, 2], 7);
        let mut states = code.states().to_vec();
        let from: BitString = "00110".parse().unwrap();
        let a = states[1].remove(&from).unwrap();
        states[1].insert("00111".parse().unwrap(), a);
        let bad = LogicalCode::new(7, code.weights().to_vec(), code.residues().to_vec(), states).unwrap();
        let exact = transversal_check(&bad, &AuditConfig::rational());
        assert!(!exact.passed());
        assert_eq!(exact.entries[1].offending, Some("00111".parse().unwrap()));
        let float = transversal_check(&bad, &AuditConfig::float(DEFAULT_TAU));
        assert!(!float.passed());
        assert!(float.entries[0].passed);
    }

    #[test]
    fn neighbor_terms_are_computed() {
        // |0⟩ = (|00⟩ + |01⟩)/√2 and |1⟩ = (|10⟩ − |11⟩)/√2: X₂ has diagonal 1 on
        // state 0 and −1 on state 1, so the diagonal check must fail exactly.
        let bs = |s: &str| s.parse::<BitString>().unwrap();
        let half = Rational::new(1, 2);
        let s0 = BTreeMap::from([
            (bs("00"), Amplitude::positive(half.clone())),
            (bs("01"), Amplitude::positive(half.clone())),
        ]);
        let s1 = BTreeMap::from([
            (bs("10"), Amplitude::positive(half.clone())),
            (bs("11"), Amplitude::signed(true, half)),
        ]);
        let code = LogicalCode::new(2, vec![1, 0], vec![0, 1], vec![s0, s1]).unwrap();
        let report = kl_check(&code, &AuditConfig::rational());
        assert!(report.neighbor_pairs > 0);
        assert!(report
            .failures()
            .any(|e| e.pauli == Pauli::X && e.site == 2 && e.j == 1 && e.k == 1));
        assert!(!kl_check(&code, &AuditConfig::float(DEFAULT_TAU)).passed());
    }

    #[test]
    fn repeated_state_fails_orthogonality() {
        let half = Rational::new(1, 2);
        let state: BTreeMap<BitString, Amplitude> = ["00", "11"]
            .iter()
            .map(|x| (x.parse().unwrap(), Amplitude::positive(half.clone())))
            .collect();
        let code = LogicalCode::new(2, vec![1, 1], vec![0, 0], vec![state.clone(), state]).unwrap();
        for config in [AuditConfig::rational(), AuditConfig::float(DEFAULT_TAU)] {
            let report = kl_check(&code, &config);
            assert!(report
                .failures()
                .any(|e| e.pauli == Pauli::I && e.site == 0 && (e.j, e.k) == (0, 1)));
        }
        assert!(!full_audit(&code, &AuditConfig::default()).accepted());
    }
}
