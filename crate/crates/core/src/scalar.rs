//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry, constraint and integration code is written against [`Real`],
//! which is satisfied by `f32` and `f64`. Complex amplitudes are
//! `num_complex::Complex<T>` over the same scalar.

use nalgebra::RealField;
use num_complex::Complex;

/// Real scalar usable as the base field of the state space.
pub trait Real: RealField + Copy {}

impl<T: RealField + Copy> Real for T {}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Lossy conversion back to `f64`, used for diagnostics and error payloads.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_subset().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn cabs2<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub(crate) fn cabs<T: Real>(z: Complex<T>) -> T {
    cabs2(z).sqrt()
}

/// `exp(i * angle)`.
#[inline]
pub(crate) fn phase<T: Real>(angle: T) -> Complex<T> {
    Complex::new(angle.cos(), angle.sin())
}

#[inline]
pub(crate) fn arg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}
