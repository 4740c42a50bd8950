//! Scalar abstraction shared by the geometry, planning and learning code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the whole crate is generic over.
///
/// Implemented for `f32` and `f64`. Training and the gradient checks run in
/// `f64`; `f32` is available for cheaper inference and geometry.
pub trait Real:
    Float + FloatConst + Debug + Display + Default + Sum + Send + Sync + Serialize + DeserializeOwned + 'static
{
    /// Converts an `f64` literal into this scalar.
    fn lit(x: f64) -> Self;

    /// Widens to `f64`.
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle<T: Real>(angle: T) -> T {
    let pi = T::PI();
    let tau = T::TAU();
    let mut a = angle % tau;
    if a > pi {
        a = a - tau;
    } else if a <= -pi {
        a = a + tau;
    }
    a
}
