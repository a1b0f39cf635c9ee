//! Scalar abstractions.
//!
//! The dynamics and the built-in controllers only need field arithmetic and an
//! ordering, so they are written against [`Scalar`] and run unchanged on `f64`,
//! `f32` or exact rationals ([`Exact`]). Norms, power-law fits and anything
//! needing `powf`/`ln` use [`Real`], which is implemented for floats only.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Exact rational scalar.
pub type Exact = BigRational;

/// Arithmetic needed by the chain dynamics and controllers.
pub trait Scalar:
    Num + Signed + Clone + Debug + PartialOrd + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Converts a vehicle index, chain size or step count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion used for reporting and serialization.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    /// `min(max(self, lo), hi)` without requiring `Ord`.
    fn clamp_to(self, lo: &Self, hi: &Self) -> Self {
        if &self < lo {
            lo.clone()
        } else if &self > hi {
            hi.clone()
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Clone
        + Debug
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Floating-point scalars (`f32`, `f64`).
pub trait Real: Scalar + Float + Copy {}

impl Real for f32 {}
impl Real for f64 {}

/// Builds the exact rational `num / den`.
///
/// # Panics
/// If `den == 0`.
pub fn ratio(num: i64, den: i64) -> Exact {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratio_round_trips_to_f64() {
        let r = ratio(1, 10);
        assert_eq!(r.to_f64_lossy(), 0.1);
        assert_eq!(Exact::from_count(7), ratio(7, 1));
    }

    #[test]
    fn clamp_to_saturates_both_sides() {
        assert_eq!(2.0f64.clamp_to(&-0.5, &0.5), 0.5);
        assert_eq!((-2.0f64).clamp_to(&-0.5, &0.5), -0.5);
        assert_eq!(ratio(1, 4).clamp_to(&ratio(-1, 2), &ratio(1, 2)), ratio(1, 4));
    }

    #[test]
    fn half_is_exact() {
        assert_eq!(Exact::half(), ratio(1, 2));
        assert_eq!(f32::half(), 0.5);
    }
}
