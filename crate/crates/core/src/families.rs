//! Closed-form code families and the degenerate-residue controlled-phase code.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitspace::{modular_inner_product, BitString, MAX_QUBITS};
use crate::codes::{Amplitude, CodeError, LogicalCode};
use crate::exactnum::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("invalid family spec: {0}")]
    Spec(String),
    #[error("class with residue {residue} is empty")]
    EmptyClass { residue: u32 },
    #[error("class with residue {residue} is not column-balanced at site {site}: {ones} ones out of {size}")]
    Unbalanced {
        residue: u32,
        site: usize,
        ones: usize,
        size: usize,
    },
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// `C₀ = {0ⁿ, 1ⁿ}` family with `w = (1, …, 1, m − (n−1))` and second residue `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremaFamilySpec {
    pub n: usize,
    pub m: u32,
    pub s: u32,
}

impl ExtremaFamilySpec {
    pub fn new(n: usize, m: u32, s: u32) -> Result<Self, FamilyError> {
        let spec = ExtremaFamilySpec { n, m, s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        let (n, m, s) = (self.n, self.m as usize, self.s as usize);
        if !(2..=MAX_QUBITS).contains(&n) {
            return Err(FamilyError::Spec(format!("n = {n} must lie in [2, {MAX_QUBITS}]")));
        }
        if m < n {
            return Err(FamilyError::Spec(format!(
                "m = {m} < n = {n}: C₀ would contain more than the two extremal strings"
            )));
        }
        if s + n < m + 1 || s > n - 1 {
            return Err(FamilyError::Spec(format!(
                "s = {s} outside the two-slice window [{}, {}]",
                m as i64 - (n as i64 - 1),
                n - 1
            )));
        }
        Ok(())
    }

    /// `t = n − 1 + s − m`, the weight of the `u` part in the `B_t` slice.
    pub fn t(&self) -> usize {
        self.n - 1 + self.s as usize - self.m as usize
    }

    pub fn weights(&self) -> Vec<u32> {
        let mut w = vec![1; self.n - 1];
        w.push(self.m - (self.n as u32 - 1));
        w
    }

    /// Set when the shift screen does not certify distance 2.
    pub fn screen_warning(&self) -> Option<String> {
        let m = self.m;
        let last = m - (self.n as u32 - 1);
        let bad = [1 % m, m - 1, last % m, (m - last) % m];
        bad.contains(&(self.s % m)).then(|| {
            format!(
                "s = {} is congruent to ±1 or ±{last} mod {m}; the shift screen does not guarantee distance 2",
                self.s
            )
        })
    }
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `|0_L⟩ = √(1−s/m)|0ⁿ⟩ + √(s/m)|1ⁿ⟩`; `|1_L⟩` spreads `(m−s)/m` evenly over
/// `A_s = {(u,0) : wt u = s}` and `s/m` evenly over `B_t = {(u,1) : wt u = t}`.
pub fn build_extrema_code(spec: &ExtremaFamilySpec) -> Result<LogicalCode, FamilyError> {
    spec.validate()?;
    if let Some(w) = spec.screen_warning() {
        log::warn!("{w}");
    }
    let (n, m, s) = (spec.n, spec.m as i64, spec.s as i64);
    let t = spec.t();
    let zero = BTreeMap::from([
        (BitString::zeros(n), Amplitude::positive(Rational::new(m - s, m))),
        (BitString::ones(n), Amplitude::positive(Rational::new(s, m))),
    ]);
    let a_mass = Rational::new(m - s, m * binomial(n - 1, s as usize));
    let b_mass = Rational::new(s, m * binomial(n - 1, t));
    let one = BitString::all(n)
        .filter_map(|y| {
            let last = y.bit(n - 1);
            let wt_u = y.weight() as usize - usize::from(last);
            match (last, wt_u) {
                (false, w) if w == s as usize => Some((y, Amplitude::positive(a_mass.clone()))),
                (true, w) if w == t => Some((y, Amplitude::positive(b_mass.clone()))),
                _ => None,
            }
        })
        .collect();
    Ok(LogicalCode::new(spec.m, spec.weights(), vec![0, spec.s], vec![zero, one])?)
}

/// Uniform states on the even-weight strings of each residue class.
///
/// Field names follow the catalog record syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvenParityFamilySpec {
    pub n: usize,
    pub m: u32,
    pub w: Vec<u32>,
    #[serde(rename = "S")]
    pub s: Vec<u32>,
}

impl EvenParityFamilySpec {
    pub fn validate(&self) -> Result<(), FamilyError> {
        if self.n == 0 || !self.n.is_multiple_of(2) || self.n > MAX_QUBITS {
            return Err(FamilyError::Spec(format!("n = {} must be even and at most {MAX_QUBITS}", self.n)));
        }
        if self.m < 3 {
            return Err(FamilyError::Spec(format!("m = {} must be at least 3", self.m)));
        }
        if self.w.len() != self.n {
            return Err(FamilyError::Spec(format!("{} weights for n = {}", self.w.len(), self.n)));
        }
        if self.w.iter().any(|&w| w >= self.m) {
            return Err(FamilyError::Spec(format!("weights {:?} must lie in [0, {}]", self.w, self.m - 1)));
        }
        if self.s.first() != Some(&0) {
            return Err(FamilyError::Spec("residues must start with 0".into()));
        }
        let mut seen = self.s.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.s.len() || self.s.iter().any(|&s| s >= self.m) {
            return Err(FamilyError::Spec(format!("residues {:?} must be distinct and below m", self.s)));
        }
        Ok(())
    }

    /// `C⁺_{S_k}` for every k, in residue order of `S`.
    pub fn supports(&self) -> Result<Vec<Vec<BitString>>, FamilyError> {
        self.validate()?;
        Ok(self
            .s
            .iter()
            .map(|&target| {
                BitString::all(self.n)
                    .filter(|x| x.weight() % 2 == 0)
                    .filter(|x| modular_inner_product(&self.w, x, self.m).expect("validated") == target)
                    .collect()
            })
            .collect())
    }
}

/// Column balance is checked exactly for every class before building.
pub fn build_even_parity_code(spec: &EvenParityFamilySpec) -> Result<LogicalCode, FamilyError> {
    let supports = spec.supports()?;
    let mut states = Vec::with_capacity(supports.len());
    for (support, &residue) in supports.iter().zip(&spec.s) {
        if support.is_empty() {
            return Err(FamilyError::EmptyClass { residue });
        }
        for site in 0..spec.n {
            let ones = support.iter().filter(|x| x.bit(site)).count();
            if 2 * ones != support.len() {
                return Err(FamilyError::Unbalanced {
                    residue,
                    site: site + 1,
                    ones,
                    size: support.len(),
                });
            }
        }
        let p = Rational::new(1, support.len() as i64);
        states.push(support.iter().map(|&x| (x, Amplitude::positive(p.clone()))).collect());
    }
    Ok(LogicalCode::new(spec.m, spec.w.clone(), spec.s.clone(), states)?)
}

/// The ((6,4,2)) code with transversal `diag(1, 1, 1, i)`.
///
/// With `t ∈ F₂³`, `φ(t) = (t₁, t₂, t₃, t₁⊕t₂⊕t₃)` and `ψ(t)` its odd-parity
/// twin, states 0–2 are `¼ Σ_t s_j(t)(|00φ(t)⟩ + |11φ(t)⟩)` with character
/// signs `s₀ = 1`, `s₁ = χ₃χ₄`, `s₂ = χ₃χ₅`, and state 3 is
/// `¼ Σ_t χ₅(t)(|10φ(t)⟩ + |01ψ(t)⟩)`.
pub fn build_642_code() -> LogicalCode {
    let sixteenth = Rational::new(1, 16);
    let string = |head: u32, tail: u32| BitString::from_index(6, (head << 4) | tail).expect("6 bits");
    let mut states: Vec<BTreeMap<BitString, Amplitude>> = vec![BTreeMap::new(); 4];
    for t in 0..8u32 {
        let (t1, t2, t3) = ((t >> 2) & 1, (t >> 1) & 1, t & 1);
        let parity = t1 ^ t2 ^ t3;
        let phi = (t1 << 3) | (t2 << 2) | (t3 << 1) | parity;
        let psi = phi ^ 1;
        let chi = |bit: u32| bit == 1;
        let signs = [false, chi(t1) ^ chi(t2), chi(t1) ^ chi(t3)];
        for (j, &negative) in signs.iter().enumerate() {
            for head in [0b00, 0b11] {
                states[j].insert(string(head, phi), Amplitude::signed(negative, sixteenth.clone()));
            }
        }
        states[3].insert(string(0b10, phi), Amplitude::signed(chi(t3), sixteenth.clone()));
        states[3].insert(string(0b01, psi), Amplitude::signed(chi(t3), sixteenth.clone()));
    }
    LogicalCode::new(4, vec![1, 3, 2, 2, 2, 2], vec![0, 0, 0, 1], states).expect("normalized by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{full_audit, AuditConfig};
    use crate::codes::{transversal_action, z_expectations};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn extrema_n5_m5_s2() {
        let code = build_extrema_code(&ExtremaFamilySpec::new(5, 5, 2).unwrap()).unwrap();
        assert_eq!(code.weights(), &[1, 1, 1, 1, 1]);
        assert_eq!(code.state(0)[&bs("00000")].radicand, Rational::new(3, 5));
        assert_eq!(code.state(0)[&bs("11111")].radicand, Rational::new(2, 5));
        let a: Vec<&str> = vec!["11000", "10100", "10010", "01100", "01010", "00110"];
        let b: Vec<&str> = vec!["10001", "01001", "00101", "00011"];
        assert_eq!(code.state(1).len(), 10);
        for x in a {
            assert_eq!(code.state(1)[&bs(x)].radicand, Rational::new(3, 30));
        }
        for x in b {
            assert_eq!(code.state(1)[&bs(x)].radicand, Rational::new(2, 20));
        }
        assert!(full_audit(&code, &AuditConfig::default()).accepted());
    }

    #[test]
    fn extrema_n6_m7_s3() {
        let code = build_extrema_code(&ExtremaFamilySpec::new(6, 7, 3).unwrap()).unwrap();
        assert_eq!(code.weights(), &[1, 1, 1, 1, 1, 2]);
        assert_eq!(z_expectations(&code), vec![vec![Rational::new(1, 7); 6]; 2]);
        let gate = transversal_action(&code).unwrap();
        assert_eq!(gate.to_string(), "diag(1, ω7^3)");
        assert_eq!(gate.order, 7);
        assert_eq!(code.state(1).len(), 15);
        assert_eq!(code.state(1)[&bs("000011")].radicand, Rational::new(3, 35));
        assert_eq!(code.state(1)[&bs("111000")].radicand, Rational::new(4, 70));
    }

    #[test]
    fn extrema_spec_errors_and_warnings() {
        assert!(ExtremaFamilySpec::new(5, 4, 2).is_err());
        assert!(ExtremaFamilySpec::new(5, 7, 2).is_err());
        assert!(ExtremaFamilySpec::new(5, 5, 5).is_err());
        let warned = ExtremaFamilySpec::new(5, 7, 3).unwrap();
        assert!(warned.screen_warning().is_some());
        assert!(ExtremaFamilySpec::new(6, 7, 3).unwrap().screen_warning().is_none());
        // s ≡ 1 falls outside the window for n = 5, m = 7; catch it with a wider n
        let s1 = ExtremaFamilySpec::new(8, 8, 1).unwrap();
        assert!(s1.screen_warning().is_some());
    }

    #[test]
    fn even_parity_examples() {
        type Case = (usize, u32, Vec<u32>, Vec<u32>, Vec<usize>, u32);
        let cases: [Case; 4] = [
            (4, 6, vec![1, 2, 4, 5], vec![0, 3], vec![4, 2], 2),
            (6, 8, vec![1, 2, 3, 5, 6, 7], vec![0, 4], vec![8, 4], 2),
            (6, 8, vec![6, 4, 0, 2, 7, 5], vec![0, 2], vec![4, 4], 4),
            (6, 9, vec![1, 2, 5, 5, 7, 1], vec![0, 3, 6], vec![6, 6, 8], 3),
        ];
        for (n, m, w, s, sizes, order) in cases {
            let spec = EvenParityFamilySpec { n, m, w, s };
            let code = build_even_parity_code(&spec).unwrap();
            let got: Vec<usize> = code.states().iter().map(BTreeMap::len).collect();
            assert_eq!(got, sizes);
            assert_eq!(transversal_action(&code).unwrap().order, order);
            assert!(full_audit(&code, &AuditConfig::default()).accepted());
            assert!(z_expectations(&code).iter().flatten().all(Rational::is_zero));
        }
    }

    #[test]
    fn example_one_supports() {
        let spec = EvenParityFamilySpec {
            n: 4,
            m: 6,
            w: vec![1, 2, 4, 5],
            s: vec![0, 3],
        };
        let supports = spec.supports().unwrap();
        let text: Vec<Vec<String>> = supports.iter().map(|c| c.iter().map(|x| x.to_string()).collect()).collect();
        assert_eq!(text, vec![vec!["0000", "0110", "1001", "1111"], vec!["0011", "1100"]]);
    }

    #[test]
    fn imbalance_is_reported() {
        let spec = EvenParityFamilySpec {
            n: 4,
            m: 5,
            w: vec![1, 1, 1, 1],
            s: vec![0, 2],
        };
        assert!(matches!(
            build_even_parity_code(&spec),
            Err(FamilyError::Unbalanced { residue: 0, site: 1, .. })
        ));
        let bad = EvenParityFamilySpec {
            n: 3,
            m: 5,
            w: vec![1, 1, 1],
            s: vec![0],
        };
        assert!(matches!(build_even_parity_code(&bad), Err(FamilyError::Spec(_))));
    }

    #[test]
    fn code_642() {
        let code = build_642_code();
        assert_eq!(code.amplitude_count(), 64);
        let gate = transversal_action(&code).unwrap();
        assert_eq!(gate.to_string(), "diag(1, 1, 1, i)");
        assert_eq!(gate.order, 4);
        let report = full_audit(&code, &AuditConfig::default());
        assert!(report.accepted(), "{:?}", report.failure_lines());
        // the union support has Hamming-1 pairs, so cancellations were real
        assert!(report.rational_kl.as_ref().unwrap().neighbor_pairs > 0);
        assert!(code.state(1)[&bs("001001")].phase == crate::exactnum::Phase::half());
        assert!(code.state(3)[&bs("011110")].phase == crate::exactnum::Phase::half());
    }

    #[test]
    fn sign_flip_in_degenerate_block_is_flagged() {
        let code = build_642_code();
        let mut states = code.states().to_vec();
        let x = bs("001001");
        let a = states[1][&x].clone();
        states[1].insert(x, Amplitude::signed(a.phase.is_zero(), a.radicand));
        let broken = LogicalCode::new(4, code.weights().to_vec(), code.residues().to_vec(), states).unwrap();
        assert!(!full_audit(&broken, &AuditConfig::default()).accepted());
    }
}
