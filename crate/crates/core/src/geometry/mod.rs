//! States, observables and the bracket geometry of projective Hilbert space.
//!
//! Conventions (with hbar = 1):
//!
//! * the symplectic bracket of two expectation functions is
//!   `-i <[F, G]>`, realized by the Hamiltonian vector field
//!   `X_G = -i (G - <G>) |x>`;
//! * the metric bracket is the symmetrized covariance
//!   `1/2 <{F, G}> - <F><G>`, realized by the gradient vector field
//!   `Y_G = 1/2 (G - <G>) |x>`.
//!
//! In both cases the directional derivative of `<F>` along a tangent vector
//! `v` at `x` is `2 Re <x|F|v>`.

mod action_angle;
mod operator;
mod state;

pub use action_angle::{
    action_angle_coords, action_angle_state, check_orthonormal, energy_basis, frequencies, ActionAngleCoords,
};
pub use operator::{HermitianOperator, HERMITICITY_TOLERANCE};
pub use state::{flatten, unflatten, PureState, TangentVector, NORMALIZATION_TOLERANCE};

pub(crate) use state::norm_squared;

use num_complex::Complex;

use crate::error::{check_dim, Result};
use crate::scalar::{cabs, lit, Real};

/// `<x|op|x> / <x|x>`; the imaginary residue is discarded.
pub fn expectation<T: Real>(op: &HermitianOperator<T>, x: &PureState<T>) -> Result<T> {
    check_dim(op.dim(), x.dim())?;
    let v = x.amplitudes();
    let num = v.dotc(&op.apply(v)).re;
    Ok(num / norm_squared(v))
}

/// `-i <x|[f, g]|x>`, the symplectic (Poisson) bracket of two expectation
/// functions.
pub fn commutator_bracket<T: Real>(f: &HermitianOperator<T>, g: &HermitianOperator<T>, x: &PureState<T>) -> Result<T> {
    check_dim(f.dim(), x.dim())?;
    check_dim(g.dim(), x.dim())?;
    let v = x.amplitudes();
    // <x|fg|x> = <fx|gx>; -i(<fg> - <gf>) = 2 Im <fx|gx>
    let fg = f.apply(v).dotc(&g.apply(v));
    Ok(lit::<T>(2.0) * fg.im / norm_squared(v))
}

/// `1/2 <{f, g}> - <f><g>`, the metric bracket of two expectation functions.
pub fn covariance_bracket<T: Real>(f: &HermitianOperator<T>, g: &HermitianOperator<T>, x: &PureState<T>) -> Result<T> {
    check_dim(f.dim(), x.dim())?;
    check_dim(g.dim(), x.dim())?;
    let v = x.amplitudes();
    let n = norm_squared(v);
    let fv = f.apply(v);
    let gv = g.apply(v);
    let sym = fv.dotc(&gv).re / n;
    let ef = v.dotc(&fv).re / n;
    let eg = v.dotc(&gv).re / n;
    Ok(sym - ef * eg)
}

/// Horizontal part of `op|x>`, i.e. `(op - <op>) |x>`.
pub(crate) fn centered_action<T: Real>(
    op: &HermitianOperator<T>,
    x: &PureState<T>,
) -> Result<nalgebra::DVector<Complex<T>>> {
    let mean = expectation(op, x)?;
    let v = x.amplitudes();
    let m = Complex::new(mean, T::zero());
    Ok(op.apply(v) - v.map(|z| z * m))
}

/// Schrodinger flow `-i (h - <h>) |x>`.
pub fn hamiltonian_vector_field<T: Real>(h: &HermitianOperator<T>, x: &PureState<T>) -> Result<TangentVector<T>> {
    let minus_i = Complex::new(T::zero(), -T::one());
    let comps = centered_action(h, x)?.map(|z| z * minus_i);
    Ok(TangentVector::from_parts(x.clone(), comps))
}

/// Fubini-Study gradient flow of `<f>`: `1/2 (f - <f>) |x>`.
pub fn gradient_vector_field<T: Real>(f: &HermitianOperator<T>, x: &PureState<T>) -> Result<TangentVector<T>> {
    let half = Complex::new(lit::<T>(0.5), T::zero());
    let comps = centered_action(f, x)?.map(|z| z * half);
    Ok(TangentVector::from_parts(x.clone(), comps))
}

/// Geodesic distance `arccos |<x|y>|`, in `[0, pi/2]`.
pub fn fs_distance<T: Real>(x: &PureState<T>, y: &PureState<T>) -> Result<T> {
    let overlap = cabs(x.inner(y)?);
    let n = (norm_squared(x.amplitudes()) * norm_squared(y.amplitudes())).sqrt();
    Ok((overlap / n).min(T::one()).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sx() -> HermitianOperator<f64> {
        HermitianOperator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sy() -> HermitianOperator<f64> {
        HermitianOperator::new(DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]))
            .unwrap()
    }

    fn sz() -> HermitianOperator<f64> {
        HermitianOperator::diagonal(&[1.0, -1.0]).unwrap()
    }

    fn bloch(theta: f64, phi: f64) -> PureState<f64> {
        PureState::from_slice(&[
            c((theta / 2.0).cos(), 0.0),
            c(phi.cos() * (theta / 2.0).sin(), phi.sin() * (theta / 2.0).sin()),
        ])
        .unwrap()
    }

    #[test]
    fn expectation_examples() {
        let zero = PureState::basis(2, 0).unwrap();
        assert_eq!(expectation(&sz(), &zero).unwrap(), 1.0);
        assert_eq!(expectation(&sx(), &zero).unwrap(), 0.0);
        assert!((expectation(&sz(), &bloch(FRAC_PI_3, 0.0)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let x = PureState::<f64>::basis(3, 0).unwrap();
        assert!(matches!(expectation(&sz(), &x), Err(crate::Error::Dimension { .. })));
    }

    #[test]
    fn commutator_examples() {
        let x = bloch(0.7, 1.1);
        assert_eq!(commutator_bracket(&sx(), &sx(), &x).unwrap(), 0.0);
        let y = bloch(FRAC_PI_2, FRAC_PI_2);
        assert!((commutator_bracket(&sx(), &sz(), &y).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_examples() {
        let zero = PureState::basis(2, 0).unwrap();
        assert!(covariance_bracket(&sz(), &sz(), &zero).unwrap().abs() < 1e-15);
        let x = bloch(FRAC_PI_4, FRAC_PI_4);
        assert!((covariance_bracket(&sx(), &sx(), &x).unwrap() - 0.75).abs() < 1e-12);
        let y = bloch(FRAC_PI_3, 0.0);
        let expected = -(3f64).sqrt() / 4.0;
        assert!((covariance_bracket(&sx(), &sz(), &y).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_field_examples() {
        let zero = PureState::basis(2, 0).unwrap();
        assert!(hamiltonian_vector_field(&sz(), &zero).unwrap().norm() < 1e-15);
        let x = bloch(FRAC_PI_2, 0.0);
        let v = hamiltonian_vector_field(&sz(), &x).unwrap();
        assert!((v.norm_squared() - 1.0).abs() < 1e-12);
        assert!(v.derivative_of(&sx()).unwrap().abs() < 1e-12);
        assert!((v.derivative_of(&sy()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_field_examples() {
        let zero = PureState::basis(2, 0).unwrap();
        assert!(gradient_vector_field(&sz(), &zero).unwrap().norm() < 1e-15);
        let x = bloch(FRAC_PI_2, FRAC_PI_2);
        let v = gradient_vector_field(&sx(), &x).unwrap();
        assert!((v.derivative_of(&sx()).unwrap() - 1.0).abs() < 1e-12);
        let id = HermitianOperator::identity(2).unwrap();
        assert!(gradient_vector_field(&id, &x).unwrap().norm() < 1e-15);
    }

    #[test]
    fn fs_distance_examples() {
        let zero = PureState::<f64>::basis(2, 0).unwrap();
        let one = PureState::basis(2, 1).unwrap();
        assert_eq!(fs_distance(&zero, &zero).unwrap(), 0.0);
        assert!((fs_distance(&zero, &one).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((fs_distance(&zero, &bloch(FRAC_PI_2, 0.3)).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert!(fs_distance(&bloch(1.0, 2.0), &bloch(1.0, 2.0).with_phase(PI / 3.0)).unwrap() < 1e-7);
    }

    #[test]
    fn fields_are_tangent() {
        let x = bloch(0.4, 2.3);
        let v = hamiltonian_vector_field(&sx(), &x).unwrap();
        assert!(TangentVector::new(x.clone(), v.components().clone()).is_ok());
        let w = gradient_vector_field(&sy(), &x).unwrap();
        assert!(TangentVector::new(x, w.components().clone()).is_ok());
    }
}
