use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Relative step used when none is supplied: `1e-6 * max(1, |x_i|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Central-difference gradient with per-coordinate step
/// `step * max(1, |x_i|)`.
pub fn finite_difference_gradient<T, F>(f: F, coords: &DVector<T>, step: T) -> Result<DVector<T>>
where
    T: Real,
    F: Fn(&DVector<T>) -> T,
{
    if !(step > T::zero()) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let mut grad = DVector::zeros(coords.len());
    let mut probe = coords.clone();
    for i in 0..coords.len() {
        let h = step * coords[i].abs().max(T::one());
        probe[i] = coords[i] + h;
        let up = f(&probe);
        probe[i] = coords[i] - h;
        let down = f(&probe);
        probe[i] = coords[i];
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite function value while differentiating coordinate {i}")));
        }
        grad[i] = (up - down) / (lit::<T>(2.0) * h);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn constant_has_zero_gradient() {
        let g = finite_difference_gradient(|_: &DVector<f64>| 3.5, &DVector::from_vec(vec![1.0, -2.0]), 1e-6).unwrap();
        assert_eq!(g, DVector::zeros(2));
    }

    #[test]
    fn linear_slope() {
        let f = |x: &DVector<f64>| 2.0 * x[0] - 0.5 * x[1] + 1.0;
        let g = finite_difference_gradient(f, &DVector::from_vec(vec![0.3, 7.0]), 1e-6).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-9 && (g[1] + 0.5).abs() < 1e-9);
    }

    #[test]
    fn bloch_x_component() {
        let f = |x: &DVector<f64>| x[0].sin() * x[1].cos();
        let g = finite_difference_gradient(f, &DVector::from_vec(vec![FRAC_PI_4, FRAC_PI_4]), 1e-5).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-8);
        assert!((g[1] + 0.5).abs() < 1e-8);
    }

    #[test]
    fn non_finite_is_an_error() {
        let f = |x: &DVector<f64>| if x[0] > 0.0 { f64::NAN } else { 0.0 };
        let r = finite_difference_gradient(f, &DVector::from_vec(vec![0.0]), 1e-6);
        assert!(matches!(r, Err(Error::Evaluation(_))));
    }
}
