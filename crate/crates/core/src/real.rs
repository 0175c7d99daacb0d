use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type the toolkit's math is generic over.
///
/// Implemented by `f32` and `f64` (and any other `num_traits::Float` with
/// primitive conversions). The helper constructors panic only when a constant
/// is not representable in the target type, which cannot happen for the
/// literals used internally.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("constant not representable")
    }

    fn of_usize(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("count not representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("value not representable as f64")
    }

    fn half() -> Self {
        Self::of(0.5)
    }

    fn two() -> Self {
        Self::of(2.0)
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}
