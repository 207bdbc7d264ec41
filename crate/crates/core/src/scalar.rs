use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar used throughout the crate: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Send
    + Sync
    + Debug
    + Display
    + LowerExp
    + 'static
{
    /// Converts an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Surface measure of the unit sphere in `R^n`, n = 1, 2, 3.
pub fn sphere_area<T: Real>(dim: usize) -> T {
    match dim {
        1 => T::of(2.0),
        2 => T::of(2.0) * T::PI(),
        _ => T::of(4.0) * T::PI(),
    }
}

/// Volume of the unit ball in `R^n`, n = 1, 2, 3.
pub fn ball_volume<T: Real>(dim: usize) -> T {
    sphere_area::<T>(dim) / T::of_usize(dim)
}
