//! Scalar abstraction for the closed-form parts of the toolkit.
//!
//! Constants, expansions and the constraint algebra are written once over
//! [`Real`] and work for `f32` and `f64`. Grid and surface quadrature are
//! `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a small integer.
    fn int(k: i64) -> Self {
        Self::from_i64(k).expect("integer representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
