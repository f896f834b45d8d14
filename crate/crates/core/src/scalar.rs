//! Scalar abstraction shared by every geometric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point type the engine is generic over (`f32` or `f64`).
///
/// The associated constants carry precision-dependent thresholds. Contract
/// tolerances quoted elsewhere in the crate are for `f64`; `f32` gets the
/// looser values below.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Largest accepted per-entry asymmetry `|a_ij - conj(a_ji)|`, relative to
    /// `max(1, max |a_ij|)`, before a Hermitian constructor rejects its input.
    const ASYMMETRY_TOL: f64;

    /// Relative tolerance used when checking orthonormality of user supplied
    /// tangent pairs.
    const ORTHONORMAL_TOL: f64;

    /// Converts an `f64` literal. Never fails for finite input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const ASYMMETRY_TOL: f64 = 1e-9;
    const ORTHONORMAL_TOL: f64 = 1e-8;
}

impl Real for f32 {
    const ASYMMETRY_TOL: f64 = 1e-4;
    const ORTHONORMAL_TOL: f64 = 1e-4;
}
