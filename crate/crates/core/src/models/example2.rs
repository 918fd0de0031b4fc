//! Single spin-1/2 with `H = sigma_z`, constrained to conserve `<sigma_x>`
//! by the metric method.

use super::spin::{pauli, Axis, BlochCoords};
use crate::constraint::{Constraint, ConstraintSet, Flow};
use crate::error::{Error, Result};
use crate::geometry::HermitianOperator;
use crate::scalar::{lit, Real};

/// Closed-form `(theta_dot, phi_dot)`.
pub fn example2_field<T: Real>(c: &BlochCoords<T>) -> Result<(T, T)> {
    let (st, ct) = (c.theta.sin(), c.theta.cos());
    let (sp, cp) = (c.phi.sin(), c.phi.cos());
    let denominator = T::one() - st * st * cp * cp;
    if denominator <= lit(1e-12) {
        return Err(Error::ChartSingularity("1 - sin^2(theta) cos^2(phi) vanishes at the x poles".into()));
    }
    let two: T = lit(2.0);
    let sin2t = two * st * ct;
    let sin2p = two * sp * cp;
    let theta_dot = lit::<T>(0.5) * sin2t * sin2p / denominator;
    let phi_dot = two * ct * ct * cp * cp / denominator;
    Ok((theta_dot, phi_dot))
}

/// `<sigma_x> = sin(theta) cos(phi)`.
pub fn example2_constraint_value<T: Real>(c: &BlochCoords<T>) -> T {
    c.theta.sin() * c.phi.cos()
}

pub fn example2_hamiltonian<T: Real>() -> HermitianOperator<T> {
    pauli(Axis::Z)
}

/// `<sigma_x>` conserved at its initial value.
pub fn example2_constraints<T: Real>() -> ConstraintSet<T> {
    ConstraintSet::new(vec![Constraint::conserved(pauli(Axis::X)).with_label("sigma_x")]).expect("single constraint")
}

pub fn example2_metric_flow<T: Real>() -> Flow<T> {
    Flow::metric(example2_constraints(), example2_hamiltonian()).expect("qubit constraint and Hamiltonian")
}
