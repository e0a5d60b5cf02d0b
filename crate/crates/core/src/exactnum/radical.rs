//! Exact sums of square roots of rationals, optionally weighted by roots of unity.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{NumError, Phase, Rational};

/// Trial-division bound for square-free reduction of large integers.
const TRIAL_LIMIT: u64 = 1 << 20;

/// Split a positive integer into `(f, s)` with `n = f² · s` and `s` square-free.
pub fn square_free_split(n: &BigInt) -> Result<(BigInt, BigInt), NumError> {
    if !n.is_positive() {
        return Err(NumError::Domain(format!("square-free split of non-positive {n}")));
    }
    if let Some(small) = n.to_u64() {
        let (f, s) = square_free_split_u64(small);
        return Ok((BigInt::from(f), BigInt::from(s)));
    }
    let mut rest = n.clone();
    let mut f = BigInt::one();
    let mut s = BigInt::one();
    let mut p = 2u64;
    while p < TRIAL_LIMIT && BigInt::from(p) * BigInt::from(p) <= rest {
        let bp = BigInt::from(p);
        let mut e = 0u32;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        f *= bp.pow(e / 2);
        if e % 2 == 1 {
            s *= &bp;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest.is_one() {
        return Ok((f, s));
    }
    let root = rest.sqrt();
    if &root * &root == rest {
        return Ok((f * root, s));
    }
    // every remaining prime factor exceeds the trial limit; with fewer than
    // three of them a non-square remainder is square-free
    let limit = BigInt::from(TRIAL_LIMIT);
    if rest < &limit * &limit * &limit {
        return Ok((f, s * rest));
    }
    Err(NumError::Domain(format!("cannot certify square-free part of {n}")))
}

fn square_free_split_u64(mut n: u64) -> (u64, u64) {
    let mut f = 1u64;
    let mut s = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        f *= p.pow(e / 2);
        if e % 2 == 1 {
            s *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (f, s * n)
}

/// `√r` for rational `r ≥ 0`, as `coefficient · √radicand` with a square-free
/// integer radicand. Returns `None` for `r = 0`.
pub fn canonical_sqrt(r: &Rational) -> Result<Option<(Rational, BigInt)>, NumError> {
    if r.is_negative() {
        return Err(NumError::Domain(format!("square root of negative {r}")));
    }
    if r.is_zero() {
        return Ok(None);
    }
    // √(a/b) = √(ab) / b
    let (a, b) = (r.numer(), r.denom());
    let (f, s) = square_free_split(&(&a * &b))?;
    Ok(Some((Rational::from_bigints(f, b)?, s)))
}

/// `Σ q · √s` over distinct square-free integers `s`. Zero iff empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RadicalSum {
    terms: BTreeMap<BigInt, Rational>,
}

impl RadicalSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// `coefficient · √radicand` for a non-negative rational radicand.
    pub fn term(coefficient: &Rational, radicand: &Rational) -> Result<Self, NumError> {
        let mut out = RadicalSum::new();
        out.add_term(coefficient, radicand)?;
        Ok(out)
    }

    pub fn add_term(&mut self, coefficient: &Rational, radicand: &Rational) -> Result<(), NumError> {
        if let Some((f, s)) = canonical_sqrt(radicand)? {
            self.add_canonical(coefficient * &f, s);
        }
        Ok(())
    }

    fn add_canonical(&mut self, coefficient: Rational, radicand: BigInt) {
        if coefficient.is_zero() {
            return;
        }
        let slot = self.terms.entry(radicand).or_default();
        *slot += &coefficient;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&mut self, other: &RadicalSum) {
        for (s, q) in &other.terms {
            self.add_canonical(q.clone(), s.clone());
        }
    }

    pub fn scale(&mut self, factor: &Rational) {
        if factor.is_zero() {
            self.terms.clear();
            return;
        }
        for v in self.terms.values_mut() {
            *v *= factor;
        }
    }

    pub fn negated(&self) -> RadicalSum {
        let mut out = self.clone();
        out.scale(&Rational::from_integer(-1));
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value, if the sum has no irrational part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&BigInt::one()).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigInt, &Rational)> {
        self.terms.iter()
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(s, q)| q.to_f64() * s.to_f64().unwrap_or(f64::NAN).sqrt())
            .sum()
    }
}

impl fmt::Display for RadicalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, q)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if s.is_one() {
                write!(f, "{q}")?;
            } else {
                write!(f, "{q}*sqrt({s})")?;
            }
        }
        Ok(())
    }
}

/// Exact `Σ qₐ q_b √(rₐ r_b)` over all pairs of `(coefficient, radicand)` terms.
pub fn radical_inner(
    a: &[(Rational, Rational)],
    b: &[(Rational, Rational)],
) -> Result<RadicalSum, NumError> {
    let mut out = RadicalSum::new();
    for (qa, ra) in a {
        if ra.is_negative() {
            return Err(NumError::Domain(format!("negative radicand {ra}")));
        }
        for (qb, rb) in b {
            if rb.is_negative() {
                return Err(NumError::Domain(format!("negative radicand {rb}")));
            }
            out.add_term(&(qa * qb), &(ra * rb))?;
        }
    }
    Ok(out)
}

/// Three-valued result of an exact zero test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    NonZero,
    /// Terms with phases outside the quarter turns remain; linear dependence
    /// over the rationals cannot be ruled out by this representation.
    Undecided,
}

/// `Σ q · ζ · √s` with `ζ` a root of unity, kept canonical so that
/// `ζ` and `−ζ` share one key.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhasedRadicalSum {
    terms: BTreeMap<(Phase, BigInt), Rational>,
}

impl PhasedRadicalSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `coefficient · e^{2πi·phase} · √radicand`.
    pub fn add_term(&mut self, coefficient: &Rational, phase: Phase, radicand: &Rational) -> Result<(), NumError> {
        let Some((f, s)) = canonical_sqrt(radicand)? else {
            return Ok(());
        };
        let mut q = coefficient * &f;
        let (phase, flip) = phase.fold_half_turn();
        if flip {
            q = -q;
        }
        if q.is_zero() {
            return Ok(());
        }
        let key = (phase, s);
        let slot = self.terms.entry(key.clone()).or_default();
        *slot += &q;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `self −= other`, term by term in canonical form.
    pub fn subtract(&mut self, other: &PhasedRadicalSum) {
        for (key, q) in &other.terms {
            let slot = self.terms.entry(key.clone()).or_default();
            *slot -= q;
            if slot.is_zero() {
                self.terms.remove(key);
            }
        }
    }

    /// Real and imaginary parts when every phase is a quarter turn.
    pub fn split_quarter_turns(&self) -> Option<(RadicalSum, RadicalSum)> {
        let mut re = RadicalSum::new();
        let mut im = RadicalSum::new();
        for ((phase, s), q) in &self.terms {
            if phase.is_zero() {
                re.add_canonical(q.clone(), s.clone());
            } else if *phase == Phase::quarter() {
                im.add_canonical(q.clone(), s.clone());
            } else {
                return None;
            }
        }
        Some((re, im))
    }

    pub fn zero_test(&self) -> ZeroTest {
        if self.terms.is_empty() {
            return ZeroTest::Zero;
        }
        match self.split_quarter_turns() {
            // distinct square-free radicals are independent over Q, and so are
            // the real and imaginary parts
            Some(_) => ZeroTest::NonZero,
            None => ZeroTest::Undecided,
        }
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for ((phase, s), q) in &self.terms {
            let mag = q.to_f64() * s.to_f64().unwrap_or(f64::NAN).sqrt();
            let (sin, cos) = phase.angle().sin_cos();
            re += mag * cos;
            im += mag * sin;
        }
        (re, im)
    }
}

impl fmt::Display for PhasedRadicalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((re, im)) = self.split_quarter_turns() {
            return match (re.is_zero(), im.is_zero()) {
                (true, true) => write!(f, "0"),
                (false, true) => write!(f, "{re}"),
                (true, false) => write!(f, "i*({im})"),
                (false, false) => write!(f, "{re} + i*({im})"),
            };
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((p, s), q)| format!("{q}*e(2pi*{p})*sqrt({s})"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
