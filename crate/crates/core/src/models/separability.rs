//! Algebraic constraint keeping two qubits disentangled.
//!
//! A two-qubit state `c0|00> + c1|01> + c2|10> + c3|11>` is a product state
//! iff `c0 c3 - c1 c2 = 0`. The real and imaginary parts of that quantity, on
//! normalized amplitudes in the gauge chart, give two chart-function
//! constraints whose joint zero set is the product surface.

use nalgebra::DVector;
use num_complex::Complex;

use crate::constraint::{AffineChart, ChartFunction, Constraint, ConstraintSet};
use crate::error::{check_dim, Result};
use crate::geometry::PureState;
use crate::scalar::{lit, Real};

fn surrogate_of<T: Real>(c: &DVector<Complex<T>>) -> Complex<T> {
    c[0] * c[3] - c[1] * c[2]
}

/// `c0 c3 - c1 c2` on the normalized gauge-fixed representative.
pub fn concurrence_surrogate<T: Real>(x: &PureState<T>) -> Result<Complex<T>> {
    check_dim(4, x.dim())?;
    Ok(surrogate_of(x.gauge_fixed().amplitudes()))
}

/// `f(psi) / |psi|^2` on the chart section.
fn chart_value<T: Real>(chart: &AffineChart, coords: &DVector<T>) -> Complex<T> {
    let psi = chart.section(coords).expect("separability constraint expects two-qubit chart coordinates");
    let n = psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    surrogate_of(&psi) / Complex::new(n, T::zero())
}

/// Coordinate gradients of `Re` and `Im` of [`chart_value`].
fn chart_gradients<T: Real>(chart: &AffineChart, coords: &DVector<T>) -> (DVector<T>, DVector<T>) {
    let psi = chart.section(coords).expect("separability constraint expects two-qubit chart coordinates");
    let n = psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    let f = surrogate_of(&psi);
    // holomorphic partials df/dpsi_j
    let partial = [psi[3], -psi[2], -psi[1], psi[0]];
    let two: T = lit(2.0);
    let mut re = DVector::zeros(coords.len());
    let mut im = DVector::zeros(coords.len());
    for (slot, j) in chart.free_indices().enumerate() {
        for (offset, unit) in
            [Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::one())].into_iter().enumerate()
        {
            let a = 2 * slot + offset;
            let df = partial[j] * unit;
            let dn = two * coords[a];
            let d = df / Complex::new(n, T::zero()) - f * Complex::new(dn / (n * n), T::zero());
            re[a] = d.re;
            im[a] = d.im;
        }
    }
    (re, im)
}

/// `(Re, Im)` of the concurrence surrogate as two chart-function constraints
/// with target zero, using analytic chart gradients.
pub fn separability_constraints<T: Real>() -> ConstraintSet<T> {
    let re = ChartFunction::new(4, |chart: &AffineChart, c: &DVector<T>| chart_value(chart, c).re)
        .with_gradient(|chart: &AffineChart, c: &DVector<T>| chart_gradients(chart, c).0);
    let im = ChartFunction::new(4, |chart: &AffineChart, c: &DVector<T>| chart_value(chart, c).im)
        .with_gradient(|chart: &AffineChart, c: &DVector<T>| chart_gradients(chart, c).1);
    ConstraintSet::new(vec![
        Constraint::chart_function(re, T::zero()).with_label("separability_re"),
        Constraint::chart_function(im, T::zero()).with_label("separability_im"),
    ])
    .expect("two constraints on a common dimension")
}

/// Same constraints, differentiated by central differences.
pub fn separability_constraints_fd<T: Real>() -> ConstraintSet<T> {
    let re = ChartFunction::new(4, |chart: &AffineChart, c: &DVector<T>| chart_value(chart, c).re);
    let im = ChartFunction::new(4, |chart: &AffineChart, c: &DVector<T>| chart_value(chart, c).im);
    ConstraintSet::new(vec![
        Constraint::chart_function(re, T::zero()).with_label("separability_re"),
        Constraint::chart_function(im, T::zero()).with_label("separability_im"),
    ])
    .expect("two constraints on a common dimension")
}
