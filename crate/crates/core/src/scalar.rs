//! Scalar abstraction. Every numeric module of this crate is generic over a
//! floating scalar so the same code runs in `f32` or `f64`.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::ops::AddAssign;

/// Floating scalar (`f32` or `f64`) the library is generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + AddAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Lift an `f64` literal into `Self`. All literals used by the crate are
    /// finite, so the conversion cannot fail.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}
