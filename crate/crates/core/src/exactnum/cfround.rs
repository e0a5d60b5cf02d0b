//! Best rational approximation under a denominator bound.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{NumError, Rational};

/// Closest rational to `v` whose denominator is at most `max_den`.
///
/// The double is first converted exactly, then its continued-fraction
/// expansion is walked until the next convergent would exceed the bound.
/// The answer is either that last convergent or the largest admissible
/// semiconvergent beyond it; exact midpoints go to the smaller denominator,
/// then to the smaller numerator.
pub fn cf_round(v: f64, max_den: u64) -> Result<Rational, NumError> {
    if !v.is_finite() {
        return Err(NumError::NonFinite(v));
    }
    if max_den == 0 {
        return Err(NumError::Domain("denominator bound must be at least 1".into()));
    }
    let exact = Rational::from_f64(v)?;
    Ok(best_approximation(&exact, &BigInt::from(max_den)))
}

/// [`cf_round`] on an exact input.
pub fn best_approximation(x: &Rational, max_den: &BigInt) -> Rational {
    if x.denom() <= *max_den {
        return x.clone();
    }
    // convergents p_k/q_k with p_{-1}/q_{-1} = 1/0, p_{-2}/q_{-2} = 0/1
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut num = x.numer();
    let mut den = x.denom();
    loop {
        let a = num.div_floor(&den);
        let q2 = &q0 + &a * &q1;
        if q2 > *max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let rem = &num - &a * &den;
        num = std::mem::replace(&mut den, rem);
        // den > max_den >= q1, so the expansion cannot terminate here
        debug_assert!(!den.is_zero());
    }
    // largest semiconvergent still inside the bound
    let k = (max_den - &q0).div_floor(&q1);
    let semi = Rational::from_bigints(&p0 + &k * &p1, &q0 + &k * &q1).expect("positive denominator");
    let conv = Rational::from_bigints(p1, q1).expect("positive denominator");

    let d_semi = (&semi - x).abs();
    let d_conv = (&conv - x).abs();
    match d_semi.cmp(&d_conv) {
        std::cmp::Ordering::Less => semi,
        std::cmp::Ordering::Greater => conv,
        std::cmp::Ordering::Equal => tie_break(semi, conv),
    }
}

fn tie_break(a: Rational, b: Rational) -> Rational {
    let key = |r: &Rational| (r.denom(), r.numer());
    if key(&a) <= key(&b) {
        a
    } else {
        b
    }
}

/// Absolute distance helper used by tests and diagnostics.
pub fn approximation_error(v: f64, r: &Rational) -> f64 {
    (v - r.to_f64()).abs()
}
