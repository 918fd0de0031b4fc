use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::constraint::ConstraintSet;
use crate::error::{Error, Result};
use crate::geometry::PureState;
use crate::scalar::{lit, to_f64, Real};

/// Newton iteration onto `Phi^i = target_i` along the gradient fields
/// `Y_i`. Every constraint needs a target (see
/// [`ConstraintSet::pinned_at`]).
pub fn project_to_surface<T: Real>(
    x: &PureState<T>,
    cs: &ConstraintSet<T>,
    max_iters: usize,
    tol: T,
) -> Result<PureState<T>> {
    let mut x = x.clone();
    let mut residuals = cs.residuals(&x)?;
    let worst = |r: &[T]| r.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    for _ in 0..max_iters {
        if worst(&residuals) <= tol {
            return Ok(x);
        }
        let reps = cs.representers(&x)?;
        let n = reps.len();
        let m = DMatrix::from_fn(n, n, |i, j| reps[i].dotc(&reps[j]).re);
        let r = DVector::from_column_slice(&residuals);
        // dPhi_i(w) = 2 Re<a_i|w> = -r_i with w = -sum mu_j a_j
        let mu = m
            .svd(true, true)
            .solve(&r.scale(lit(0.5)), lit(1e-14))
            .map_err(|_| Error::ProjectionFailure { iterations: 0, residual: to_f64(worst(&residuals)) })?;
        let mut w = DVector::<Complex<T>>::zeros(x.dim());
        for (a, coeff) in reps.iter().zip(mu.iter()) {
            w -= a.map(|z| z * Complex::new(*coeff, T::zero()));
        }
        x = PureState::new(x.amplitudes() + w)?;
        residuals = cs.residuals(&x)?;
    }
    let r = worst(&residuals);
    if r <= tol {
        Ok(x)
    } else {
        Err(Error::ProjectionFailure { iterations: max_iters, residual: to_f64(r) })
    }
}
