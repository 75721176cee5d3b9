//! Scalar abstraction for the filter state.
//!
//! Streaming state is normally kept in `f32`; the same code runs at `f64`
//! for reference replays and equivalence checks.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point types usable as per-pixel filter state.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Copy + Debug + Display + Default + Send + Sync + 'static
{
    const ZERO: Self;
    const ONE: Self;
    const HALF: Self;

    /// Converts a 64-bit literal or coefficient, rounding to nearest.
    fn lit(v: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const HALF: Self = 0.5;

            #[inline(always)]
            fn lit(v: f64) -> Self {
                v as $t
            }

            #[inline(always)]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
