//! Scalar abstraction for the numeric kernels.
//!
//! Kernels in [`crate::metrics`], [`crate::logreg`] and [`crate::betting`]
//! are written against [`Real`] so they work for `f32` and `f64` alike; the
//! pipeline fixes the type through [`crate::Scalar`].

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the numeric kernels.
pub trait Real: Float + FromPrimitive + ToPrimitive + core::fmt::Debug + 'static {
    /// Lossy conversion from `f64`, for constants like thresholds and floors.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in Real")
    }

    /// Lossy conversion from `usize`, for sample counts.
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize count representable in Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}
