use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the solvers are generic over. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable at all.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative slack used when deciding whether a point sits on the ball boundary.
    /// `1e-9` for `f64`, widened for lower precision types.
    fn feas_tol() -> Self {
        let floor = Self::epsilon() * Self::c(64.0);
        Self::c(1e-9).max(floor)
    }

    /// Absolute slack for the self-projection cone test.
    fn cone_slack() -> Self {
        let floor = Self::epsilon() * Self::c(16.0);
        Self::c(1e-12).max(floor)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
