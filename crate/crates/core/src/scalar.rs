//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Floating point type the simulator can run on: `f32` or `f64`.
///
/// Covariances, carriers and criteria are generic over this trait. Numeric
/// tolerances are written as `f64` literals and widened through [`Real::tol`]
/// so that a `1e-12` check does not become unsatisfiable in single precision.
pub trait Real: RealField + Copy + ToPrimitive + Display + Debug + Send + Sync + 'static {
    /// Machine epsilon of the type.
    const EPSILON: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// `t`, but never tighter than a small multiple of machine epsilon.
    #[inline]
    fn tol(t: f64) -> Self {
        Self::lit(t.max(64.0 * Self::EPSILON))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const EPSILON: f64 = f32::EPSILON as f64;
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;
}

/// `10·log10(ratio)`.
pub fn to_db<T: Real>(ratio: T) -> T {
    T::lit(10.0) * ratio.log10()
}

/// Linear power ratio for a dB value.
pub fn from_db<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(phi: T) -> T {
    let two_pi = T::two_pi();
    let mut w = phi % two_pi;
    if w <= -T::pi() {
        w += two_pi;
    } else if w > T::pi() {
        w -= two_pi;
    }
    w
}
