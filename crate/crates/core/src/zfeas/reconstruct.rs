//! Exact recovery from a floating-point LP solution.

use super::{ProbabilityTable, ZFeasError, ZFeasibilityLP};
use crate::exactnum::{bareiss_echelon, cf_round, least_norm_solve, solve_exact, LinearSystem, Rational, Solution};

/// Magnitudes at or below this are treated as structural zeros when ranking
/// basis candidates; they are still used to complete a degenerate basis.
const NEAR_ZERO: f64 = 1e-7;

/// Maximum clip-and-reproject rounds in the projection path.
const MAX_CLIP_ROUNDS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecoveryPath {
    Basis,
    Projection,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconstruction {
    pub table: ProbabilityTable,
    pub path: RecoveryPath,
}

fn check_len(lp: &ZFeasibilityLP, numeric: &[f64]) -> Result<(), ZFeasError> {
    if numeric.len() != lp.cols() {
        return Err(ZFeasError::Dimension {
            expected: lp.cols(),
            found: numeric.len(),
        });
    }
    if let Some(v) = numeric.iter().find(|v| !v.is_finite()) {
        return Err(ZFeasError::Num(crate::exactnum::NumError::NonFinite(*v)));
    }
    Ok(())
}

/// Original rows forming a basis of the row space of `A`.
fn independent_rows(sys: &LinearSystem) -> Vec<usize> {
    bareiss_echelon(sys, false).independent_rows()
}

/// Incremental rank test over exact column vectors.
struct ColumnSpan {
    reduced: Vec<(usize, Vec<Rational>)>,
}

impl ColumnSpan {
    fn try_add(&mut self, mut v: Vec<Rational>) -> bool {
        for (p, b) in &self.reduced {
            if !v[*p].is_zero() {
                let f = &v[*p] / &b[*p];
                for (vi, bi) in v.iter_mut().zip(b) {
                    if !bi.is_zero() {
                        *vi -= &(&f * bi);
                    }
                }
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                self.reduced.push((p, v));
                true
            }
            None => false,
        }
    }
}

/// Exact basic solution guided by a numeric one.
///
/// Columns are ranked by descending magnitude (ties by index, near-zeros
/// last) and taken greedily while they raise the rank, until a square
/// nonsingular subsystem on the independent rows is found. The solution of
/// that subsystem, zero-filled, must satisfy the full program exactly.
pub fn basis_solve(lp: &ZFeasibilityLP, numeric: &[f64]) -> Result<ProbabilityTable, ZFeasError> {
    check_len(lp, numeric)?;
    let sys = lp.system();
    let rows = independent_rows(sys);
    let reduced = sys.select_rows(&rows);
    let rank = rows.len();

    let mut order: Vec<usize> = (0..lp.cols()).collect();
    order.sort_by(|&a, &b| {
        let (ma, mb) = (numeric[a].abs(), numeric[b].abs());
        let (za, zb) = (ma <= NEAR_ZERO, mb <= NEAR_ZERO);
        za.cmp(&zb).then(mb.total_cmp(&ma)).then(a.cmp(&b))
    });
    let mut span = ColumnSpan { reduced: Vec::new() };
    let mut chosen = Vec::with_capacity(rank);
    for c in order {
        if chosen.len() == rank {
            break;
        }
        let column: Vec<Rational> = (0..rank).map(|r| Rational::from_integer(reduced.entry(r, c))).collect();
        if span.try_add(column) {
            chosen.push(c);
        }
    }
    if chosen.len() < rank {
        return Err(ZFeasError::NoBasis);
    }
    chosen.sort_unstable();
    let Solution::Unique(pb) = solve_exact(&reduced.select_columns(&chosen)) else {
        return Err(ZFeasError::NoBasis);
    };
    let mut p = vec![Rational::zero(); lp.cols()];
    for (c, v) in chosen.into_iter().zip(pb) {
        p[c] = v;
    }
    if !lp.accepts(&p) {
        return Err(ZFeasError::Reconstruction("basic solution violates the program".into()));
    }
    finish(lp, &p)
}

/// Basis path first, then projection with bound `denominator_bound`.
pub fn exact_bfs_reconstruct(
    lp: &ZFeasibilityLP,
    numeric: &[f64],
    denominator_bound: u64,
) -> Result<Reconstruction, ZFeasError> {
    match basis_solve(lp, numeric) {
        Ok(table) => Ok(Reconstruction {
            table,
            path: RecoveryPath::Basis,
        }),
        Err(ZFeasError::Dimension { expected, found }) => Err(ZFeasError::Dimension { expected, found }),
        Err(first) => {
            log::debug!("basis reconstruction failed ({first}); projecting");
            rationalize_by_projection(lp, numeric, denominator_bound).map(|table| Reconstruction {
                table,
                path: RecoveryPath::Projection,
            })
        }
    }
}

/// Least-norm exact correction of `p` on the columns not in `fixed`, so that
/// `A p = b` holds exactly.
fn project(lp: &ZFeasibilityLP, p: &mut [Rational], fixed: &[bool]) -> Result<(), ZFeasError> {
    let sys = lp.system();
    let free: Vec<usize> = (0..lp.cols()).filter(|&c| !fixed[c]).collect();
    let residual: Vec<Rational> = sys.residual(p).into_iter().map(|r| -r).collect();
    if residual.iter().all(Rational::is_zero) {
        return Ok(());
    }
    if free.is_empty() {
        return Err(ZFeasError::Reconstruction("every coordinate clipped".into()));
    }
    let sub = sys.select_columns(&free);
    let rows = independent_rows(&sub);
    let rhs: Vec<Rational> = rows.iter().map(|&r| residual[r].clone()).collect();
    let d = least_norm_solve(&sub.select_rows(&rows), &rhs)
        .ok_or_else(|| ZFeasError::Reconstruction("singular Gram matrix".into()))?;
    for (c, dc) in free.into_iter().zip(d) {
        p[c] += &dc;
    }
    if !sys.is_satisfied_by(p) {
        return Err(ZFeasError::Reconstruction("projection is inconsistent".into()));
    }
    Ok(())
}

/// Round, project, clip, renormalize.
///
/// Each entry is rounded to the nearest rational with denominator at most
/// `denominator_bound`; the exact least-norm correction restores `A p = b`.
/// Negative coordinates are pinned to zero and the rest re-projected, at most
/// twice. Blocks are then renormalized and everything re-checked exactly.
pub fn rationalize_by_projection(
    lp: &ZFeasibilityLP,
    numeric: &[f64],
    denominator_bound: u64,
) -> Result<ProbabilityTable, ZFeasError> {
    check_len(lp, numeric)?;
    let mut p = numeric
        .iter()
        .map(|&v| cf_round(v, denominator_bound))
        .collect::<Result<Vec<_>, _>>()?;
    let mut fixed = vec![false; lp.cols()];
    project(lp, &mut p, &fixed)?;
    let mut rounds = 0;
    while p.iter().any(Rational::is_negative) {
        if rounds == MAX_CLIP_ROUNDS {
            return Err(ZFeasError::Reconstruction(format!(
                "negative entries remain after {MAX_CLIP_ROUNDS} clip rounds"
            )));
        }
        for (c, v) in p.iter_mut().enumerate() {
            if v.is_negative() {
                *v = Rational::zero();
                fixed[c] = true;
            }
        }
        project(lp, &mut p, &fixed)?;
        rounds += 1;
    }
    for j in 0..lp.k() {
        let range = lp.block(j);
        let total: Rational = p[range.clone()].iter().sum();
        if total.is_zero() {
            return Err(ZFeasError::Reconstruction(format!("block {j} has zero mass")));
        }
        if !total.is_one() {
            for v in &mut p[range] {
                *v = &*v / &total;
            }
        }
    }
    if !lp.accepts(&p) {
        return Err(ZFeasError::Reconstruction("final exact check failed".into()));
    }
    finish(lp, &p)
}

fn finish(lp: &ZFeasibilityLP, p: &[Rational]) -> Result<ProbabilityTable, ZFeasError> {
    let table = lp.table_from_vector(p);
    table.validate().map_err(ZFeasError::Reconstruction)?;
    Ok(table)
}
