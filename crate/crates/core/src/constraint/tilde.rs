use nalgebra::{DMatrix, DVector};

use super::chart::{Chart, ChartFrame};
use super::constraint::ConstraintSet;
use super::engine::{check_even, solve_checked};
use crate::error::{check_dim, Result};
use crate::scalar::Real;

/// Rows `d_a Phi^i` of the constraint differentials in chart coordinates.
pub fn constraint_gradients<T: Real>(frame: &ChartFrame<T>, cs: &ConstraintSet<T>) -> Result<DMatrix<T>> {
    let n = cs.len();
    let mut d = DMatrix::zeros(n, frame.coord_dim());
    for (i, c) in cs.iter().enumerate() {
        let a = c.gradient_representer(&frame.state)?;
        d.set_row(i, &frame.covector(&a).transpose());
    }
    Ok(d)
}

/// Constraint term `Omega^ac Omega^bd omega_ij d_c Phi^i d_d Phi^j` of the
/// induced structure.
pub fn omega_tilde_correction<T: Real, C: Chart<T> + ?Sized>(
    chart: &C,
    cs: &ConstraintSet<T>,
    coords: &DVector<T>,
) -> Result<DMatrix<T>> {
    let frame = chart.frame(coords)?;
    correction_in(&frame, cs)
}

fn correction_in<T: Real>(frame: &ChartFrame<T>, cs: &ConstraintSet<T>) -> Result<DMatrix<T>> {
    check_dim(cs.dim(), frame.state.dim())?;
    check_even(cs)?;
    let d = constraint_gradients(frame, cs)?;
    let big = &frame.omega_inverse;
    let small = &d * big * d.transpose();
    // omega_ij d_d Phi^j, by solving rather than inverting
    let (x, _) = solve_checked(&small, &d, cs.scale())?;
    let a = d.transpose() * x;
    Ok(big * a * big.transpose())
}

/// Induced (Dirac) structure `Omega~^ab` on the constraint surface, in chart
/// coordinates. It annihilates every constraint gradient, and
/// `Omega~^ab d_b H` reproduces the multiplier-form symplectic field.
pub fn omega_tilde<T: Real, C: Chart<T> + ?Sized>(
    chart: &C,
    cs: &ConstraintSet<T>,
    coords: &DVector<T>,
) -> Result<DMatrix<T>> {
    let frame = chart.frame(coords)?;
    Ok(&frame.omega_inverse + correction_in(&frame, cs)?)
}
