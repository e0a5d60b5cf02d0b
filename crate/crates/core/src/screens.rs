//! Fast combinatorial filters run before any linear programming.

use serde::{Deserialize, Serialize};

use crate::bitspace::{sign_vector, union_distance, ResidueClass, SearchParams, UnionDistance};
use crate::exactnum::Rational;

/// The first `(site, j, k)` with `S_j − S_k ≡ ±w_site (mod m)`; `site` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftViolation {
    pub site: usize,
    pub j: usize,
    pub k: usize,
}

/// Pass iff no single bit flip can move a string between two logical classes.
///
/// Pairs are scanned with `j > k`; the condition is symmetric so this loses
/// nothing.
pub fn shift_screen(params: &SearchParams) -> Result<(), ShiftViolation> {
    let m = params.m();
    let s = params.residues();
    for (i, &w) in params.weights().iter().enumerate() {
        let w = w % m;
        let neg = (m - w) % m;
        for j in 1..s.len() {
            for k in 0..j {
                let diff = (s[j] + m - s[k]) % m;
                if diff == w || diff == neg {
                    return Err(ShiftViolation { site: i + 1, j, k });
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistanceCheck {
    pub distance: UnionDistance,
}

impl DistanceCheck {
    /// `d(C) ≥ 2`
    pub fn passes(&self) -> bool {
        self.distance.at_least(2)
    }

    pub fn is_exactly_two(&self) -> bool {
        self.distance == UnionDistance::Finite(2)
    }
}

pub fn distance_check(classes: &[ResidueClass]) -> DistanceCheck {
    DistanceCheck {
        distance: union_distance(classes),
    }
}

/// `max_{x∈C_low} α·v(x) < β < min_{x∈C_high} α·v(x)`.
///
/// Any such hyperplane shows the two classes' Z-marginal hulls are disjoint,
/// so no common `⟨Zᵢ⟩` exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorCertificate {
    pub alpha: Vec<i64>,
    pub beta: Rational,
    pub class_low: usize,
    pub class_high: usize,
}

fn projection(alpha: &[i64], class: &ResidueClass) -> Option<(i64, i64)> {
    let values = class.members.iter().map(|x| {
        sign_vector(x)
            .iter()
            .zip(alpha)
            .map(|(&s, &a)| s as i64 * a)
            .sum::<i64>()
    });
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

pub fn verify_separator(cert: &SeparatorCertificate, classes: &[ResidueClass]) -> bool {
    if cert.class_low == cert.class_high {
        return false;
    }
    let (Some(low), Some(high)) = (classes.get(cert.class_low), classes.get(cert.class_high)) else {
        return false;
    };
    if low.members.first().is_some_and(|x| x.len() != cert.alpha.len()) {
        return false;
    }
    let (Some((_, max_low)), Some((min_high, _))) = (projection(&cert.alpha, low), projection(&cert.alpha, high))
    else {
        return false;
    };
    Rational::from_integer(max_low) < cert.beta && cert.beta < Rational::from_integer(min_high)
}

/// Candidate directions: `±eᵢ`, all-ones, and indicators of runs of equal
/// weights (the sweep keeps weights sorted, so equal weights are adjacent).
fn alpha_family(n: usize, weights: Option<&[u32]>) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for sign in [1, -1] {
            let mut a = vec![0; n];
            a[i] = sign;
            out.push(a);
        }
    }
    out.push(vec![1; n]);
    if let Some(w) = weights {
        let mut start = 0;
        while start < n {
            let end = (start..n).find(|&e| w[e] != w[start]).unwrap_or(n);
            if end - start > 1 && end - start < n {
                let mut a = vec![0; n];
                a[start..end].iter_mut().for_each(|v| *v = 1);
                out.push(a);
            }
            start = end;
        }
    }
    out.dedup();
    out
}

/// Every certificate from the fixed direction family that verifies, tried
/// over all ordered class pairs. Heuristic: an empty result proves nothing.
pub fn propose_separators(classes: &[ResidueClass], weights: Option<&[u32]>) -> Vec<SeparatorCertificate> {
    let Some(n) = classes.iter().find_map(|c| c.members.first()).map(|x| x.len()) else {
        return Vec::new();
    };
    let mut found = Vec::new();
    for alpha in alpha_family(n, weights) {
        let ranges: Vec<Option<(i64, i64)>> = classes.iter().map(|c| projection(&alpha, c)).collect();
        for (lo_idx, lo) in ranges.iter().enumerate() {
            for (hi_idx, hi) in ranges.iter().enumerate() {
                if let (Some((_, max_low)), Some((min_high, _))) = (lo, hi) {
                    if lo_idx != hi_idx && max_low < min_high {
                        let cert = SeparatorCertificate {
                            alpha: alpha.clone(),
                            beta: Rational::new(max_low + min_high, 2),
                            class_low: lo_idx,
                            class_high: hi_idx,
                        };
                        debug_assert!(verify_separator(&cert, classes));
                        found.push(cert);
                    }
                }
            }
        }
    }
    found
}

/// Convenience wrapper over a candidate's own classes and weights.
pub fn propose_for(params: &SearchParams) -> Vec<SeparatorCertificate> {
    propose_separators(&params.classes(), Some(params.weights()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitspace::BitString;

    fn params(m: u32, w: &[u32], s: &[u32]) -> SearchParams {
        SearchParams::new(m, w.to_vec(), s.to_vec()).unwrap()
    }

    #[test]
    fn screen_examples() {
        assert!(shift_screen(&params(4, &[1, 1, 1, 1], &[0, 2])).is_ok());
        assert_eq!(
            shift_screen(&params(4, &[1, 1, 1, 1], &[0, 1])),
            Err(ShiftViolation { site: 1, j: 1, k: 0 })
        );
        assert!(shift_screen(&params(7, &[1, 1, 2, 2, 2], &[0, 4])).is_ok());
    }

    #[test]
    fn distance_examples() {
        let p = params(7, &[1, 1, 2, 2, 2], &[0, 4]);
        let check = distance_check(&p.classes());
        assert!(check.passes() && check.is_exactly_two());
        let bad = ResidueClass {
            residue: 0,
            members: vec!["000".parse().unwrap(), "001".parse().unwrap()],
        };
        assert!(!distance_check(&[bad]).passes());
        // even-parity example 1 supports
        let p = params(6, &[1, 2, 4, 5], &[0, 3]);
        let even: Vec<ResidueClass> = p
            .classes()
            .into_iter()
            .map(|c| ResidueClass {
                residue: c.residue,
                members: c.members.into_iter().filter(|x| x.weight() % 2 == 0).collect(),
            })
            .collect();
        assert_eq!(even.iter().map(ResidueClass::len).sum::<usize>(), 6);
        assert!(distance_check(&even).passes());
    }

    #[test]
    fn homogeneous_instance_is_separated() {
        let p = params(5, &[1, 1, 1, 1], &[0, 2]);
        let classes = p.classes();
        assert_eq!(classes[0].members, vec![BitString::zeros(4)]);
        let cert = SeparatorCertificate {
            alpha: vec![1; 4],
            beta: Rational::from_integer(2),
            class_low: 1,
            class_high: 0,
        };
        assert!(verify_separator(&cert, &classes));
        assert!(!propose_for(&p).is_empty());
        let selfsep = SeparatorCertificate {
            class_low: 0,
            class_high: 0,
            ..cert
        };
        assert!(!verify_separator(&selfsep, &classes));
    }

    #[test]
    fn feasible_instance_has_no_separator() {
        let p = params(7, &[1, 1, 2, 2, 2], &[0, 4]);
        assert!(propose_for(&p).is_empty());
        let classes = p.classes();
        for alpha in alpha_family(5, None) {
            for (lo, hi) in [(0, 1), (1, 0)] {
                for beta in -5..=5 {
                    let cert = SeparatorCertificate {
                        alpha: alpha.clone(),
                        beta: Rational::new(2 * beta + 1, 2),
                        class_low: lo,
                        class_high: hi,
                    };
                    assert!(!verify_separator(&cert, &classes));
                }
            }
        }
    }

    #[test]
    fn identical_hulls_yield_nothing() {
        let c: Vec<BitString> = ["0011", "1100", "0101", "1010"].iter().map(|s| s.parse().unwrap()).collect();
        let a = ResidueClass {
            residue: 0,
            members: c.clone(),
        };
        let b = ResidueClass { residue: 1, members: c };
        assert!(propose_separators(&[a, b], None).is_empty());
    }
}
