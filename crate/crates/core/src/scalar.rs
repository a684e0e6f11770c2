//! Real scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
///
/// The associated defaults are scale-free tolerances tuned to the precision of
/// the type. Callers working in `f32` get looser defaults automatically.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Relative threshold separating genuine rank from round-off.
    fn default_rank_tol() -> Self;

    /// Tolerance for "this matrix is unitary" preconditions.
    fn unitary_tol() -> Self;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }
}

impl Real for f32 {
    fn default_rank_tol() -> Self {
        1e-5
    }

    fn unitary_tol() -> Self {
        1e-4
    }
}

impl Real for f64 {
    fn default_rank_tol() -> Self {
        1e-10
    }

    fn unitary_tol() -> Self {
        1e-8
    }
}

/// Complex scalar over a [`Real`].
pub type Scalar<T> = Complex<T>;

/// Dense complex column vector.
pub type Vector<T> = Vec<Complex<T>>;

pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}
