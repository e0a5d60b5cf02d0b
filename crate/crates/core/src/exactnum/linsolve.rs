//! Exact linear solving for small integer systems.
//!
//! Forward elimination is fraction-free (Bareiss): every intermediate entry
//! is an integer minor of the input, and each step divides exactly by the
//! previous pivot. Back-substitution happens over the rationals.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{NumError, Rational};

/// `A x = b` with integer data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    rows: usize,
    cols: usize,
    a: Vec<i64>,
    b: Vec<i64>,
}

impl LinearSystem {
    pub fn new(rows: usize, cols: usize, a: Vec<i64>, b: Vec<i64>) -> Result<Self, NumError> {
        if a.len() != rows * cols || b.len() != rows {
            return Err(NumError::Dimension {
                expected: rows * cols,
                found: a.len(),
            });
        }
        Ok(LinearSystem { rows, cols, a, b })
    }

    pub fn from_rows(rows: &[Vec<i64>], b: Vec<i64>) -> Result<Self, NumError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NumError::Dimension {
                expected: cols,
                found: rows.iter().map(Vec::len).find(|&l| l != cols).unwrap_or(0),
            });
        }
        let a = rows.iter().flatten().copied().collect();
        LinearSystem::new(rows.len(), cols, a, b)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> i64 {
        self.a[r * self.cols + c]
    }

    pub fn rhs(&self) -> &[i64] {
        &self.b
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.a[r * self.cols..(r + 1) * self.cols]
    }

    /// `A x` exactly.
    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = Rational::zero();
                for (c, xc) in x.iter().enumerate() {
                    match self.entry(r, c) {
                        0 => {}
                        1 => acc += xc,
                        -1 => acc -= xc,
                        v => acc += &(xc * &Rational::from_integer(v)),
                    }
                }
                acc
            })
            .collect()
    }

    /// `A x - b` exactly.
    pub fn residual(&self, x: &[Rational]) -> Vec<Rational> {
        self.apply(x)
            .into_iter()
            .zip(&self.b)
            .map(|(ax, &b)| ax - Rational::from_integer(b))
            .collect()
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        self.residual(x).iter().all(Rational::is_zero)
    }

    /// Subsystem on the given columns, keeping all rows.
    pub fn select_columns(&self, cols: &[usize]) -> LinearSystem {
        let mut a = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            a.extend(cols.iter().map(|&c| self.entry(r, c)));
        }
        LinearSystem {
            rows: self.rows,
            cols: cols.len(),
            a,
            b: self.b.clone(),
        }
    }

    /// Subsystem on the given rows.
    pub fn select_rows(&self, rows: &[usize]) -> LinearSystem {
        let mut a = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            a.extend_from_slice(self.row(r));
        }
        LinearSystem {
            rows: rows.len(),
            cols: self.cols,
            a,
            b: rows.iter().map(|&r| self.b[r]).collect(),
        }
    }
}

/// Outcome of [`solve_exact`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<Rational>),
    /// Free variables set to zero; `nullity` is the dimension of the solution set.
    Underdetermined { particular: Vec<Rational>, nullity: usize },
    Inconsistent,
}

impl Solution {
    pub fn vector(&self) -> Option<&[Rational]> {
        match self {
            Solution::Unique(x) | Solution::Underdetermined { particular: x, .. } => Some(x),
            Solution::Inconsistent => None,
        }
    }
}

/// Row echelon form produced by fraction-free elimination over an augmented matrix.
#[derive(Clone, Debug)]
pub struct Echelon {
    /// Pivot column for each nonzero row, in row order.
    pub pivots: Vec<usize>,
    /// Original row index for each echelon row.
    pub row_origin: Vec<usize>,
    rows: Vec<Vec<BigInt>>,
    cols: usize,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Original row indices that form a basis of the row space.
    pub fn independent_rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = self.row_origin[..self.rank()].to_vec();
        rows.sort_unstable();
        rows
    }
}

/// Fraction-free forward elimination of `[A | b]` (b may be absent).
///
/// Pivot choice scans columns left to right and takes the first row with a
/// nonzero entry, so the result is deterministic. Row swaps are tracked so the
/// caller can recover which original rows are independent.
pub fn bareiss_echelon(sys: &LinearSystem, augmented: bool) -> Echelon {
    let width = sys.cols + usize::from(augmented);
    let mut m: Vec<Vec<BigInt>> = (0..sys.rows)
        .map(|r| {
            let mut row: Vec<BigInt> = sys.row(r).iter().map(|&v| BigInt::from(v)).collect();
            if augmented {
                row.push(BigInt::from(sys.b[r]));
            }
            row
        })
        .collect();
    let mut origin: Vec<usize> = (0..sys.rows).collect();
    let mut pivots = Vec::new();
    let mut prev = BigInt::from(1);
    let mut r = 0;
    for c in 0..sys.cols {
        if r == sys.rows {
            break;
        }
        let Some(p) = (r..sys.rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        origin.swap(r, p);
        for i in r + 1..sys.rows {
            for j in c + 1..width {
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        // rows above the pivot row keep their scale; entries left of c stay zero
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Echelon {
        pivots,
        row_origin: origin,
        rows: m,
        cols: sys.cols,
    }
}

/// Solve `A x = b` exactly.
///
/// Returns the unique solution when the system has full column rank, a
/// particular solution (free variables zero) when it is underdetermined, and
/// `Inconsistent` otherwise.
pub fn solve_exact(sys: &LinearSystem) -> Solution {
    let ech = bareiss_echelon(sys, true);
    let rank = ech.rank();
    // a nonzero augmented entry below the last pivot row means 0 = nonzero
    if ech.rows[rank..].iter().any(|row| !row[sys.cols].is_zero()) {
        return Solution::Inconsistent;
    }
    let mut x = vec![Rational::zero(); sys.cols];
    for (k, &pc) in ech.pivots.iter().enumerate().rev() {
        let row = &ech.rows[k];
        let mut acc = Rational::from(row[ech.cols].clone());
        for (j, xj) in x.iter().enumerate().skip(pc + 1) {
            if !row[j].is_zero() && !xj.is_zero() {
                acc -= &(Rational::from(row[j].clone()) * xj);
            }
        }
        x[pc] = acc / Rational::from(row[pc].clone());
    }
    if rank == sys.cols {
        Solution::Unique(x)
    } else {
        Solution::Underdetermined {
            particular: x,
            nullity: sys.cols - rank,
        }
    }
}

/// Rank of the coefficient matrix.
pub fn rank(sys: &LinearSystem) -> usize {
    bareiss_echelon(sys, false).rank()
}

/// Least-norm solution of `A d = r` over the given rows (which must be
/// independent): `d = Aᵀ (A Aᵀ)⁻¹ r`, exact. `None` if the rows are dependent.
#[allow(clippy::needless_range_loop)]
pub fn least_norm_solve(sys: &LinearSystem, rhs: &[Rational]) -> Option<Vec<Rational>> {
    let rows = sys.rows;
    // Gram matrix is integer; solve over the rationals by plain Gauss-Jordan
    let mut g: Vec<Vec<Rational>> = (0..rows)
        .map(|i| {
            let mut row: Vec<Rational> = (0..rows)
                .map(|j| {
                    let dot: i64 = sys.row(i).iter().zip(sys.row(j)).map(|(a, b)| a * b).sum();
                    Rational::from_integer(dot)
                })
                .collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    for c in 0..rows {
        let p = (c..rows).find(|&i| !g[i][c].is_zero())?;
        g.swap(c, p);
        let inv = g[c][c].recip().ok()?;
        for v in g[c].iter_mut().skip(c) {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != c && !g[i][c].is_zero() {
                let f = g[i][c].clone();
                for j in c..=rows {
                    let t = &f * &g[c][j];
                    g[i][j] -= &t;
                }
            }
        }
    }
    let y: Vec<Rational> = g.into_iter().map(|row| row[rows].clone()).collect();
    let d = (0..sys.cols)
        .map(|c| {
            let mut acc = Rational::zero();
            for (r, yr) in y.iter().enumerate() {
                match sys.entry(r, c) {
                    0 => {}
                    v => acc += &(yr * &Rational::from_integer(v)),
                }
            }
            acc
        })
        .collect();
    Some(d)
}

#[cfg(test)]
 fn bareiss_determinant(sys: &LinearSystem) -> BigInt {
    assert_eq!(sys.rows, sys.cols);
    let ech = bareiss_echelon(sys, false);
    if ech.rank() < sys.rows {
        return BigInt::zero();
    }
    // sign from the row permutation
    let mut perm = ech.row_origin.clone();
    let mut sign = 1;
    for i in 0..perm.len() {
        while perm[i] != i {
            let j = perm[i];
            perm.swap(i, j);
            sign = -sign;
        }
    }
    let det = ech.rows[sys.rows - 1][sys.cols - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}
