//! Floating-point scalar abstraction.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by the matrix and cover layers: `f32` or `f64`.
///
/// Tolerances are per type; the `f64` values are the reference ones.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Accepted |det - 1| before renormalization.
    const DET_TOL: f64;
    /// Half-width of the parabolic band around |trace| = 2.
    const PAR_BAND: f64;
    /// Maximum rounding residual (radians) when computing deck indices.
    const INDEX_GUARD: f64;
    /// Minimum distance of a displacement extremum from a multiple of pi.
    const RANGE_GUARD: f64;
    /// Entrywise tolerance for matrix equality checks.
    const MATCH_TOL: f64;
    /// Width of the roundoff window below 0 in the canonical-lift normalization.
    const WRAP_EPS: f64;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant")
    }

    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const DET_TOL: f64 = 1e-6;
    const PAR_BAND: f64 = 1e-8;
    const INDEX_GUARD: f64 = 1e-6;
    const RANGE_GUARD: f64 = 1e-9;
    const MATCH_TOL: f64 = 1e-8;
    const WRAP_EPS: f64 = 1e-12;
}

impl Scalar for f32 {
    const DET_TOL: f64 = 1e-3;
    const PAR_BAND: f64 = 1e-4;
    const INDEX_GUARD: f64 = 1e-3;
    const RANGE_GUARD: f64 = 1e-5;
    const MATCH_TOL: f64 = 1e-4;
    const WRAP_EPS: f64 = 1e-6;
}
