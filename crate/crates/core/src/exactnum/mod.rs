//! Exact arithmetic: rationals, continued-fraction rounding, linear solving
//! over the rationals, and sums of square roots.

mod cfround;
mod linsolve;
mod phase;
mod radical;
mod rational;

pub use cfround::{approximation_error, best_approximation, cf_round};
pub use linsolve::{bareiss_echelon, least_norm_solve, rank, solve_exact, Echelon, LinearSystem, Solution};
pub use phase::Phase;
pub use radical::{canonical_sqrt, radical_inner, square_free_split, PhasedRadicalSum, RadicalSum, ZeroTest};
pub use rational::{gcd_u64, Rational};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse `{0}` as a rational")]
    Parse(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("{0}")]
    Domain(String),
}
