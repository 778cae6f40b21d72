use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Floating-point scalar accepted by the solvers: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumCast + Debug + Display + Sum + Send + Sync + 'static
{
    /// Default absolute tolerance for bisection on unit-scale quantities.
    fn root_tol() -> Self {
        let eps = Self::epsilon() * Self::from_f64(64.0).unwrap();
        eps.max(Self::from_f64(1e-12).unwrap())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the scalar type.
#[inline]
pub fn lit<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a scalar into `f64` for diagnostics.
#[inline]
pub fn to_f64<S: Real>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
