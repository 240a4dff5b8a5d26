//! Numeric abstraction for payoffs and values.
//!
//! All turn payoffs live in {-1, 0, 1} and every value the solvers produce is
//! a signed power of the discount factor, so exact rational arithmetic is
//! practical on small graphs and float arithmetic is fine everywhere else.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Scalar type used for discount factors, payoffs and values.
pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Send + Sync + 'static + Signed + FromPrimitive + ToPrimitive
{
    /// `self` raised to a nonnegative integer power.
    fn powu(&self, exp: usize) -> Self {
        num_traits::pow::pow(self.clone(), exp)
    }

    /// Converts a tolerance or other configuration constant.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite configuration constant")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_int(x: i32) -> Self {
        Self::from_i32(x).expect("small integer")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for BigRational {}

/// Builds an exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
