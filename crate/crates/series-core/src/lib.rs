//! Exact arithmetic foundation: arbitrary-precision rationals, truncated
//! multivariate formal series, finite Laurent objects in the distinguished
//! variable `z`, and dense exact linear algebra.
//!
//! All coefficients are exact rationals; no floating point appears in this
//! crate. Truncation is per-variable and exclusive, and every operation
//! respects the declared truncation orders.

pub mod coeff;
pub mod json;
pub mod linalg;
pub mod series;
pub mod zlaurent;

pub use coeff::{Coeff, FieldCoeff};
pub use linalg::QMatrix;
pub use series::Series;
pub use zlaurent::ZLaurent;

use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Rational from an integer pair; panics on zero denominator.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rint(num: i64) -> BigRational {
    BigRational::from(BigInt::from(num))
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("constant term is not a unit")]
    NonUnit,
    #[error("variable {0} declared with conflicting truncation orders {1} and {2}")]
    VarOrderMismatch(String, u32, u32),
    #[error("malformed series JSON: {0}")]
    BadJson(String),
}
