//! Scalar abstraction shared by the numeric core.
//!
//! Curvature, cubic-form, optimizer and inequality code is written once over
//! [`Real`] and instantiated for `f32` and `f64`. Exact rational arithmetic is
//! used separately for the inequality coefficients (see [`crate::inequality`]).

use nalgebra as na;
use num_traits as nt;

/// Floating point scalar usable by every generic routine in the crate.
pub trait Real:
    na::RealField + Copy + nt::FromPrimitive + nt::ToPrimitive + nt::FloatConst + Send + Sync
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        nt::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(n).expect("usize representable in scalar type")
    }

    /// Machine epsilon of the type.
    fn eps() -> Self;

    /// Smallest positive normal value.
    fn tiny() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
    fn tiny() -> Self {
        f32::MIN_POSITIVE
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
    fn tiny() -> Self {
        f64::MIN_POSITIVE
    }
}
