//! Brute-force reference implementations. Deliberately naive and written
//! without the library's solvers so that agreement means something.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use sslp_core::bitspace::BitString;
use sslp_core::codes::LogicalCode;

/// Residue of `x` straight from the definition.
pub fn residue(w: &[u32], x: &BitString, m: u32) -> u32 {
    let s: u64 = (0..x.len()).filter(|&i| x.bit(i)).map(|i| u64::from(w[i])).sum();
    (s % u64::from(m)) as u32
}

/// Minimum Hamming distance over all pairs; `None` with fewer than two strings.
pub fn all_pairs_distance(strings: &[BitString]) -> Option<u32> {
    let mut best = None;
    for (i, a) in strings.iter().enumerate() {
        for b in &strings[i + 1..] {
            let d = (a.index() ^ b.index()).count_ones();
            best = Some(best.map_or(d, |v: u32| v.min(d)));
        }
    }
    best
}

/// Gauss-Jordan on `[A | b]`; returns the unique solution when `A` has full
/// column rank and the system is consistent.
#[allow(clippy::needless_range_loop)]
fn unique_solution(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut t: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivot_row = 0;
    for c in 0..cols {
        let p = (pivot_row..rows).find(|&r| !t[r][c].is_zero())?;
        t.swap(pivot_row, p);
        let inv = t[pivot_row][c].recip();
        for v in t[pivot_row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !t[r][c].is_zero() {
                let f = t[r][c].clone();
                for k in 0..=cols {
                    let d = &f * &t[pivot_row][k];
                    t[r][k] = &t[r][k] - d;
                }
            }
        }
        pivot_row += 1;
    }
    if t[pivot_row..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|c| t[c][cols].clone()).collect())
}

/// Do the convex hulls of the classes' sign vectors share a point?
///
/// Enumerates every subset of strings as a candidate support and solves the
/// equality system exactly. A feasible system always has a solution whose
/// support columns are independent, so this search is complete.
pub fn hull_intersection_feasible(classes: &[Vec<BitString>]) -> bool {
    let n = classes[0][0].len();
    let cols: Vec<(usize, BitString)> = classes
        .iter()
        .enumerate()
        .flat_map(|(j, c)| c.iter().map(move |x| (j, *x)))
        .collect();
    let sign = |x: &BitString, i: usize| -> BigRational {
        BigRational::from_integer(BigInt::from(if x.bit(i) { -1 } else { 1 }))
    };
    let total = cols.len();
    assert!(total <= 16, "oracle is exponential");
    for mask in 1u32..(1 << total) {
        let chosen: Vec<&(usize, BitString)> = (0..total).filter(|&c| mask >> c & 1 == 1).map(|c| &cols[c]).collect();
        // every class needs some mass
        if (0..classes.len()).any(|j| chosen.iter().all(|(b, _)| *b != j)) {
            continue;
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        // E_j[s_i] − E_0[s_i] = 0
        for j in 1..classes.len() {
            for i in 0..n {
                a.push(
                    chosen
                        .iter()
                        .map(|(blk, x)| {
                            if *blk == j {
                                sign(x, i)
                            } else if *blk == 0 {
                                -sign(x, i)
                            } else {
                                BigRational::zero()
                            }
                        })
                        .collect(),
                );
                b.push(BigRational::zero());
            }
        }
        for j in 0..classes.len() {
            a.push(
                chosen
                    .iter()
                    .map(|(blk, _)| if *blk == j { BigRational::one() } else { BigRational::zero() })
                    .collect(),
            );
            b.push(BigRational::one());
        }
        if let Some(y) = unique_solution(&a, &b) {
            if y.iter().all(|v| !v.is_negative()) {
                return true;
            }
        }
    }
    false
}

type C = (f64, f64);

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// Dense state vector; index bit `n − 1 − i` is site `i`.
pub fn dense(code: &LogicalCode, j: usize) -> Vec<C> {
    let mut v = vec![(0.0, 0.0); 1 << code.n()];
    for (x, a) in code.state(j) {
        let mag = a.radicand.to_f64().sqrt();
        let theta = 2.0 * std::f64::consts::PI * a.phase.num() as f64 / a.phase.den() as f64;
        v[x.index() as usize] = (mag * theta.cos(), mag * theta.sin());
    }
    v
}

/// Applies a single-site Pauli (0 = I, 1 = X, 2 = Y, 3 = Z) to a dense vector.
pub fn apply_pauli(v: &[C], n: usize, site: usize, pauli: u8) -> Vec<C> {
    let bit = 1usize << (n - 1 - site);
    let mut out = vec![(0.0, 0.0); v.len()];
    for (y, &amp) in v.iter().enumerate() {
        let one = y & bit != 0;
        let (target, factor) = match pauli {
            0 => (y, (1.0, 0.0)),
            1 => (y ^ bit, (1.0, 0.0)),
            2 => (y ^ bit, if one { (0.0, -1.0) } else { (0.0, 1.0) }),
            _ => (y, if one { (-1.0, 0.0) } else { (1.0, 0.0) }),
        };
        let c = cmul(factor, amp);
        out[target].0 += c.0;
        out[target].1 += c.1;
    }
    out
}

fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).fold((0.0, 0.0), |acc, (x, y)| {
        let c = cmul((x.0, -x.1), *y);
        (acc.0 + c.0, acc.1 + c.1)
    })
}

/// Largest violation of `⟨j|P|k⟩ = c_P δ_jk` over P ∈ {I, X, Y, Z} on every site.
pub fn dense_kl_violation(code: &LogicalCode) -> f64 {
    let n = code.n();
    let states: Vec<Vec<C>> = (0..code.k()).map(|j| dense(code, j)).collect();
    let mut worst: f64 = 0.0;
    for pauli in 0..4u8 {
        for site in 0..n {
            let images: Vec<Vec<C>> = states.iter().map(|s| apply_pauli(s, n, site, pauli)).collect();
            let base = inner(&states[0], &images[0]);
            for (j, state) in states.iter().enumerate() {
                for (k, image) in images.iter().enumerate() {
                    let v = inner(state, image);
                    let target = if j == k { base } else { (0.0, 0.0) };
                    worst = worst.max((v.0 - target.0).hypot(v.1 - target.1));
                }
            }
        }
    }
    worst
}
