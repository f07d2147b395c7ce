//! Numeric scalar abstraction shared by the analytic and resource layers.
//!
//! Everything closed-form is written once against [`Scalar`] and evaluated
//! either in floating point (`f32`/`f64`) or exactly in [`BigRational`].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Num + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `num / den` in this scalar type.
    fn ratio(num: i64, den: i64) -> Self;

    fn count(v: u64) -> Self {
        Self::ratio(v as i64, 1)
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Integer power by repeated squaring.
    fn powu(&self, mut exp: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base.clone();
            }
            exp >>= 1;
            if exp > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }

    fn is_probability(&self) -> bool {
        *self >= Self::zero() && *self <= Self::one()
    }
}

impl Scalar for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for f32 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }
}

impl Scalar for BigRational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Converts between scalar types through `f64` unless both are exact.
pub fn convert<A: Scalar, B: Scalar>(a: &A) -> B {
    B::from_f64(a.approx()).unwrap_or_else(B::zero)
}
