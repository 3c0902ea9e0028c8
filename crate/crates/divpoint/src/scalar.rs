//! Scalar abstraction for the planar coordinate type.
//!
//! All geometry and eigendata code is generic over [`Real`] so the same
//! routines run in `f32` or `f64`. Integer counting never goes through this
//! trait; it is done exactly with big integers in [`crate::spectral`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used for coordinates, areas and eigenvectors.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + LowerExp
        + 'static
{
}

/// Shorthand for lifting an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn cast<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("finite f64 constant converts to any Real")
}
