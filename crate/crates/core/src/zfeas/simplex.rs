//! Phase-1 simplex over exact rationals with Bland's rule.
//!
//! The primary tableau is integer-preserving: every entry is an integer and
//! the true tableau is that integer matrix divided by one common positive
//! denominator (the previous pivot). Entries are minors of `[A | I | b]`, so
//! they stay small for these ±1 systems; arithmetic is checked and any
//! overflow reruns the same pivot sequence on a rational tableau.

use super::{ProbabilityTable, ZFeasibilityLP};
use crate::exactnum::Rational;

/// A basic feasible solution, or `None` when the program is infeasible.
///
/// One artificial variable per row; the phase-1 objective is their sum.
/// Entering column: smallest index with negative reduced cost. Leaving row:
/// minimum ratio, ties to the smallest basic variable index. Both choices
/// depend only on the column order, so the vertex is reproducible.
pub fn solve_feasibility(lp: &ZFeasibilityLP) -> Option<ProbabilityTable> {
    solve_vector(lp).map(|p| {
        let table = lp.table_from_vector(&p);
        debug_assert!(table.validate().is_ok());
        table
    })
}

pub(crate) fn solve_vector(lp: &ZFeasibilityLP) -> Option<Vec<Rational>> {
    let p = match integer_simplex(lp) {
        Some(result) => result,
        None => {
            log::debug!("integer tableau overflowed; using rational tableau");
            rational_simplex(lp)
        }
    };
    debug_assert!(p.as_ref().is_none_or(|p| lp.accepts(p)));
    p
}

struct IntTableau {
    rows: usize,
    width: usize,
    /// rows × (width + 1); last column is the right-hand side
    t: Vec<i128>,
    /// reduced costs, last entry is minus the objective value
    cost: Vec<i128>,
    denom: i128,
    basis: Vec<usize>,
}

impl IntTableau {
    fn at(&self, r: usize, c: usize) -> i128 {
        self.t[r * (self.width + 1) + c]
    }

    /// Returns `None` on overflow.
    fn pivot(&mut self, r: usize, c: usize) -> Option<()> {
        let stride = self.width + 1;
        let p = self.at(r, c);
        let d = self.denom;
        let pivot_row: Vec<i128> = self.t[r * stride..(r + 1) * stride].to_vec();
        let update = |row: &mut [i128]| -> Option<()> {
            let f = row[c];
            for (j, v) in row.iter_mut().enumerate() {
                let num = p.checked_mul(*v)?.checked_sub(f.checked_mul(pivot_row[j])?)?;
                debug_assert_eq!(num % d, 0);
                *v = num / d;
            }
            Some(())
        };
        for i in 0..self.rows {
            if i != r {
                update(&mut self.t[i * stride..(i + 1) * stride])?;
            }
        }
        update(&mut self.cost)?;
        self.denom = p;
        self.basis[r] = c;
        Some(())
    }
}

/// `Some(result)` unless the integer arithmetic overflowed.
fn integer_simplex(lp: &ZFeasibilityLP) -> Option<Option<Vec<Rational>>> {
    let sys = lp.system();
    let rows = sys.rows();
    let cols = sys.cols();
    let width = cols + rows;
    let stride = width + 1;
    let mut t = vec![0i128; rows * stride];
    for r in 0..rows {
        for c in 0..cols {
            t[r * stride + c] = i128::from(sys.entry(r, c));
        }
        t[r * stride + cols + r] = 1;
        t[r * stride + width] = i128::from(sys.rhs()[r]);
    }
    let mut cost = vec![0i128; stride];
    for (c, slot) in cost.iter_mut().enumerate().take(cols) {
        *slot = -(0..rows).map(|r| i128::from(sys.entry(r, c))).sum::<i128>();
    }
    cost[width] = -sys.rhs().iter().map(|&b| i128::from(b)).sum::<i128>();
    let mut tab = IntTableau {
        rows,
        width,
        t,
        cost,
        denom: 1,
        basis: (cols..width).collect(),
    };

    // the denominator stays positive: every pivot element is positive
    while let Some(enter) = (0..width).find(|&c| tab.cost[c] < 0) {
        let mut leave: Option<usize> = None;
        for r in 0..rows {
            let a = tab.at(r, enter);
            if a > 0 {
                leave = Some(match leave {
                    None => r,
                    Some(l) => {
                        // rhs_r / a  vs  rhs_l / a_l, both denominators positive
                        let lhs = tab.at(r, width).checked_mul(tab.at(l, enter))?;
                        let rhs = tab.at(l, width).checked_mul(a)?;
                        if lhs < rhs || (lhs == rhs && tab.basis[r] < tab.basis[l]) {
                            r
                        } else {
                            l
                        }
                    }
                });
            }
        }
        let r = leave.expect("phase-1 objective is bounded");
        tab.pivot(r, enter)?;
    }
    if tab.cost[width] != 0 {
        return Some(None);
    }
    let denom = Rational::from(num_bigint::BigInt::from(tab.denom));
    let mut p = vec![Rational::zero(); cols];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < cols {
            let v = Rational::from(num_bigint::BigInt::from(tab.at(r, width)));
            p[b] = &v / &denom;
        }
    }
    Some(Some(p))
}

/// Same pivot rules on an explicit rational tableau.
pub(crate) fn rational_simplex(lp: &ZFeasibilityLP) -> Option<Vec<Rational>> {
    let sys = lp.system();
    let rows = sys.rows();
    let cols = sys.cols();
    let width = cols + rows;
    // right-hand sides are 0 or 1, so no row needs negating
    let mut t: Vec<Vec<Rational>> = (0..rows)
        .map(|r| {
            let mut row: Vec<Rational> = sys.row(r).iter().map(|&v| Rational::from_integer(v)).collect();
            row.extend((0..rows).map(|a| if a == r { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    let mut rhs: Vec<Rational> = sys.rhs().iter().map(|&v| Rational::from_integer(v)).collect();
    let mut basis: Vec<usize> = (cols..width).collect();
    let mut cost: Vec<Rational> = (0..width)
        .map(|c| {
            if c < cols {
                -(0..rows).map(|r| Rational::from_integer(sys.entry(r, c))).sum::<Rational>()
            } else {
                Rational::zero()
            }
        })
        .collect();
    let mut objective: Rational = -rhs.iter().sum::<Rational>();

    while let Some(enter) = (0..width).find(|&c| cost[c].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..rows {
            if t[r][enter].is_positive() {
                let ratio = &rhs[r] / &t[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let (r, _) = leave.expect("phase-1 objective is bounded");
        rational_pivot(&mut t, &mut rhs, &mut cost, &mut objective, r, enter);
        basis[r] = enter;
    }

    if !objective.is_zero() {
        return None;
    }
    let mut p = vec![Rational::zero(); cols];
    for (r, &b) in basis.iter().enumerate() {
        if b < cols {
            p[b] = rhs[r].clone();
        }
    }
    Some(p)
}

fn rational_pivot(
    t: &mut [Vec<Rational>],
    rhs: &mut [Rational],
    cost: &mut [Rational],
    objective: &mut Rational,
    r: usize,
    c: usize,
) {
    let inv = t[r][c].recip().expect("pivot is nonzero");
    if !inv.is_one() {
        for v in t[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        rhs[r] *= &inv;
    }
    let pivot_row = t[r].clone();
    let pivot_rhs = rhs[r].clone();
    let nonzero: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for &j in &nonzero {
            let d = &f * &pivot_row[j];
            row[j] -= &d;
        }
        let d = &f * &pivot_rhs;
        rhs[i] -= &d;
    }
    if !cost[c].is_zero() {
        let f = cost[c].clone();
        for &j in &nonzero {
            let d = &f * &pivot_row[j];
            cost[j] -= &d;
        }
        let d = &f * &pivot_rhs;
        *objective -= &d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitspace::{ResidueClass, SearchParams};
    use crate::zfeas::build_lp;

    fn lp_for(m: u32, w: &[u32], s: &[u32]) -> ZFeasibilityLP {
        build_lp(&SearchParams::new(m, w.to_vec(), s.to_vec()).unwrap().classes()).unwrap()
    }

    #[test]
    fn worked_example_is_feasible() {
        let lp = lp_for(7, &[1, 1, 2, 2, 2], &[0, 4]);
        let table = solve_feasibility(&lp).unwrap();
        table.validate().unwrap();
        let expected: Vec<Rational> = [3, 3, -1, -1, -1].iter().map(|&v| Rational::new(v, 7)).collect();
        assert_eq!(table.z_expectations()[0], expected);
        assert!(table.support_size() <= lp.rows());
    }

    #[test]
    fn homogeneous_instance_is_infeasible() {
        assert!(solve_feasibility(&lp_for(5, &[1, 1, 1, 1], &[0, 2])).is_none());
    }

    #[test]
    fn single_block_is_feasible() {
        let class = SearchParams::new(5, vec![1, 2, 3], vec![0]).unwrap().classes();
        let lp = build_lp(&class).unwrap();
        assert_eq!(lp.rows(), 1);
        let table = solve_feasibility(&lp).unwrap();
        table.validate().unwrap();
    }

    #[test]
    fn deterministic() {
        let lp = lp_for(16, &[1, 1, 2, 3, 4, 5], &[0, 7]);
        let a = solve_feasibility(&lp).unwrap();
        let b = solve_feasibility(&lp).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
    }

    #[test]
    fn disjoint_marginals() {
        let a = ResidueClass {
            residue: 0,
            members: vec!["00".parse().unwrap()],
        };
        let b = ResidueClass {
            residue: 1,
            members: vec!["11".parse().unwrap()],
        };
        assert!(solve_feasibility(&build_lp(&[a, b]).unwrap()).is_none());
    }

    #[test]
    fn integer_and_rational_tableaux_agree() {
        for m in 4..=9u32 {
            for w3 in 1..m {
                for w4 in w3..m {
                    for s1 in 1..m {
                        let params = SearchParams::new(m, vec![1, 1, w3, w4], vec![0, s1]).unwrap();
                        let classes = params.classes();
                        if classes.iter().any(ResidueClass::is_empty) {
                            continue;
                        }
                        let lp = build_lp(&classes).unwrap();
                        let fast = integer_simplex(&lp).expect("no overflow at this size");
                        assert_eq!(fast, rational_simplex(&lp), "{params}");
                    }
                }
            }
        }
    }
}
