//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_traits::FromPrimitive;
use std::fmt::{Display, LowerExp};

/// Floating point scalar the library is generic over (`f32` or `f64`).
///
/// Tolerances throughout the crate are written as `f64` literals and lifted
/// with [`Real::c`]; they are tuned for `f64` and are looser in effect for `f32`.
pub trait Real:
    RealField + Copy + FromPrimitive + Display + LowerExp + Send + Sync + 'static
{
    /// Lifts an `f64` constant into the scalar type.
    fn c(v: f64) -> Self;
    /// Unit roundoff of the type.
    fn machine_epsilon() -> Self;
    /// Widens to `f64` for reporting and serialization.
    fn as_f64(self) -> f64;

    /// Base finite-difference step, `cbrt(machine_epsilon)`.
    fn fd_base_step() -> Self {
        Self::machine_epsilon().cbrt()
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn c(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn machine_epsilon() -> Self {
                <$t>::EPSILON
            }
            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
