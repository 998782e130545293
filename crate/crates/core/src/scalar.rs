//! Floating-point scalar abstraction for the dense Gaussian-graph engine.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable by the exact engine: `f64` for production runs, `f32` for
/// cheap sweeps. Tolerances are written against `f64` and widened for coarser
/// types through [`Real::tol`].
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync {
    /// Ratio applied to every `f64`-calibrated tolerance.
    const PRECISION_SCALE: f64;

    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    fn tol(base: f64) -> Self {
        Self::lit(base * Self::PRECISION_SCALE)
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const PRECISION_SCALE: f64 = 1.0;
}

impl Real for f32 {
    const PRECISION_SCALE: f64 = 1.0e6;
}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn modulus<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}
