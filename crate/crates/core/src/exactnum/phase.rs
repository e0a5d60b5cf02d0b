//! Roots of unity as reduced fractions of a full turn.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::NumError;

/// `e^{2πi·num/den}` with `0 ≤ num < den` and `gcd(num, den) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase {
    num: u64,
    den: u64,
}

impl Phase {
    pub fn new(num: i64, den: i64) -> Result<Self, NumError> {
        if den <= 0 {
            return Err(NumError::Domain(format!("phase denominator {den} must be positive")));
        }
        let num = num.rem_euclid(den);
        let g = num.gcd(&den);
        Ok(Phase {
            num: (num / g) as u64,
            den: (den / g) as u64,
        })
    }

    /// `+1`
    pub fn zero() -> Self {
        Phase { num: 0, den: 1 }
    }

    /// `−1`
    pub fn half() -> Self {
        Phase { num: 1, den: 2 }
    }

    /// `i`
    pub fn quarter() -> Self {
        Phase { num: 1, den: 4 }
    }

    /// `ω_m^k`
    pub fn root_of_unity(k: u64, m: u64) -> Self {
        Phase::new((k % m) as i64, m as i64).expect("positive modulus")
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Product of the two roots of unity.
    pub fn add(&self, other: &Phase) -> Phase {
        let den = self.den.lcm(&other.den);
        let num = self.num * (den / self.den) + other.num * (den / other.den);
        Phase::new((num % den) as i64, den as i64).expect("positive denominator")
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Phase {
        Phase::new(-(self.num as i64), self.den as i64).expect("positive denominator")
    }

    /// Map to `[0, 1/2)`, reporting whether a factor `−1` was pulled out.
    pub fn fold_half_turn(&self) -> (Phase, bool) {
        if 2 * self.num >= self.den {
            (self.add(&Phase::half()), true)
        } else {
            (*self, false)
        }
    }

    pub fn angle(&self) -> f64 {
        std::f64::consts::TAU * self.num as f64 / self.den as f64
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let (s, c) = self.angle().sin_cos();
        // exact values for quarter turns keep float audits clean
        match (self.num, self.den) {
            (0, 1) => (1.0, 0.0),
            (1, 2) => (-1.0, 0.0),
            (1, 4) => (0.0, 1.0),
            (3, 4) => (0.0, -1.0),
            _ => (c, s),
        }
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::zero()
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Phase {
    type Err = NumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumError::Parse(s.to_string());
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(NumError::ZeroDenominator);
        }
        Phase::new(n, d)
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
