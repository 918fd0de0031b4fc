//! Two spin-1/2 particles constrained to stay disentangled.
//!
//! Two independent realizations are provided:
//!
//! * [`example1_field`]: the closed-form equations of motion on
//!   `S^2 x S^2`, parameterized by three free frequencies;
//! * [`example1_operator_flow`]: the generic symplectic engine applied to
//!   [`heisenberg_hamiltonian`] with [`separability_constraints`].
//!
//! No mapping from `(J, B)` to the frequencies is assumed.

use super::separability::separability_constraints;
use super::spin::{heisenberg_hamiltonian, TwoSphereCoords};
use crate::constraint::Flow;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Params<T: Real> {
    pub omega: [T; 3],
}

impl<T: Real> Example1Params<T> {
    pub fn new(omega1: T, omega2: T, omega3: T) -> Result<Self> {
        if !(omega1.is_finite() && omega2.is_finite() && omega3.is_finite()) {
            return Err(Error::InvalidInput("frequencies must be finite".into()));
        }
        Ok(Self { omega: [omega1, omega2, omega3] })
    }
}

/// Angular velocities on the two spheres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Velocity<T: Real> {
    pub theta1: T,
    pub theta2: T,
    pub phi1: T,
    pub phi2: T,
}

impl<T: Real> Example1Velocity<T> {
    /// In coordinate order `(theta1, phi1, theta2, phi2)`.
    pub fn to_coordinate_order(&self) -> [T; 4] {
        [self.theta1, self.phi1, self.theta2, self.phi2]
    }
}

pub fn example1_field<T: Real>(c: &TwoSphereCoords<T>, p: &Example1Params<T>) -> Result<Example1Velocity<T>> {
    let (t1, f1) = (c.first.theta, c.first.phi);
    let (t2, f2) = (c.second.theta, c.second.phi);
    let [w1, w2, w3] = p.omega;
    let (s1, s2) = (t1.sin(), t2.sin());
    if s1.abs() < lit(1e-12) || s2.abs() < lit(1e-12) {
        return Err(Error::ChartSingularity("sin(theta) vanishes on one of the spheres".into()));
    }
    let (c1, c2) = (t1.cos(), t2.cos());
    let half: T = lit(0.5);
    let two: T = lit(2.0);
    let three_halves: T = lit(1.5);

    let sd = (f1 - f2).sin();
    let cd = (f1 - f2).cos();
    let theta1 = sd * s2 * ((w1 - w2) * c1 + w2 - w3);
    let theta2 = sd * s1 * ((w2 - w1) * c2 - w2 + w3);

    let ratio = cd / (s1 * s2);
    let a = w2 - w1 * half;
    let b = three_halves * w1 - w2 - two * w3;
    let dc = c1 * c1 - c2 * c2;
    let phi1 = half * (-w1 + a * c2 + b * c1 + ratio * (two * (w3 - w2) * s1 * s1 * c2 + (w1 - w2) * dc));
    let phi2 = half * (-w1 + a * c1 + b * c2 + ratio * (two * (w3 - w2) * c1 * s2 * s2 - (w1 - w2) * dc));
    Ok(Example1Velocity { theta1, theta2, phi1, phi2 })
}

/// Symplectic flow of the Heisenberg pair on the product-state surface.
pub fn example1_operator_flow<T: Real>(j: T, b: T) -> Flow<T> {
    Flow::symplectic(separability_constraints(), heisenberg_hamiltonian(j, b))
        .expect("two constraints on a four-level system")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn printed_configuration() {
        let c = TwoSphereCoords::new(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 0.0).unwrap();
        let p = Example1Params::new(1.0, 2.0, 3.0).unwrap();
        let v = example1_field(&c, &p).unwrap();
        assert!((v.theta1 + 1.0).abs() < 1e-15);
        assert!((v.theta2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn aligned_azimuths_freeze_polar_motion() {
        let c = TwoSphereCoords::new(0.4, 1.3, 2.2, 1.3).unwrap();
        let p = Example1Params::new(0.3, -1.2, 2.5).unwrap();
        let v = example1_field(&c, &p).unwrap();
        assert_eq!(v.theta1, 0.0);
        assert_eq!(v.theta2, 0.0);
    }

    #[test]
    fn equal_frequencies_freeze_polar_motion() {
        let c = TwoSphereCoords::new(0.4, 0.1, 2.2, 1.3).unwrap();
        let p = Example1Params::new(1.7, 1.7, 1.7).unwrap();
        let v = example1_field(&c, &p).unwrap();
        assert_eq!(v.theta1, 0.0);
        assert_eq!(v.theta2, 0.0);
    }

    #[test]
    fn rejects_poles() {
        let c = TwoSphereCoords::new(1e-13, 0.1, 1.0, 1.3).unwrap();
        let p = Example1Params::new(1.0, 2.0, 3.0).unwrap();
        assert!(matches!(example1_field(&c, &p), Err(Error::ChartSingularity(_))));
    }
}
