use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type used by the numerical core: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }

    /// `x` raised to at least `floor_eps` machine epsilons of `Self`.
    ///
    /// Tolerances are written for `f64`; in single precision they are
    /// unreachable and get lifted to something the type can resolve.
    #[inline]
    fn tol(x: f64, floor_eps: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(floor_eps))
    }
}

impl Real for f32 {}
impl Real for f64 {}
