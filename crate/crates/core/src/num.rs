//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use nalgebra::RealField;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the chain models are generic over (`f32` or `f64`).
///
/// Elementary functions come from [`RealField`]; `num_traits::Float` is not a
/// supertrait so that method calls stay unambiguous.
pub trait Real:
    RealField
    + Copy
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Infallible for the supported types.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal fits the scalar type")
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count fits the scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// A tolerance that never drops below a few ulps of the scalar type.
    ///
    /// Absolute windows such as `1e-12` are meaningful in `f64` but vanish in
    /// `f32`; this keeps them at least `64 * eps * scale`.
    fn tolerance(abs: f64, scale: Self) -> Self {
        let floor = Self::machine_epsilon() * Self::lit(64.0) * scale.abs().max(Self::one());
        Self::lit(abs).max(floor)
    }

    fn machine_epsilon() -> Self {
        Self::default_epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}
