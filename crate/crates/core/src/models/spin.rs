use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{expectation, HermitianOperator, PureState, TangentVector};
use crate::scalar::{lit, phase, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

pub fn pauli<T: Real>(axis: Axis) -> HermitianOperator<T> {
    let z = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let entries = match axis {
        Axis::X => [z, one, one, z],
        Axis::Y => [z, -i, i, z],
        Axis::Z => [one, z, z, -one],
    };
    HermitianOperator::new(DMatrix::from_row_slice(2, 2, &entries)).expect("Pauli matrices are Hermitian")
}

pub fn identity<T: Real>(dim: usize) -> HermitianOperator<T> {
    HermitianOperator::identity(dim).expect("identity of dimension >= 2")
}

/// Kronecker product `a (x) b`.
pub fn kron<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> HermitianOperator<T> {
    HermitianOperator::new(a.matrix().kronecker(b.matrix())).expect("product of Hermitian operators")
}

/// `-sum_kl J_kl sigma^k (x) sigma^l - B (sigma^z (x) 1 + 1 (x) sigma^z)`.
pub fn heisenberg_with_coupling<T: Real>(coupling: &Matrix3<T>, field: T) -> HermitianOperator<T> {
    let id = identity::<T>(2);
    let sz = pauli::<T>(Axis::Z);
    let mut h = &kron(&sz, &id) + &kron(&id, &sz);
    h = h.scale(-field);
    for (k, ak) in Axis::ALL.iter().enumerate() {
        for (l, al) in Axis::ALL.iter().enumerate() {
            let j = coupling[(k, l)];
            if j != T::zero() {
                h = &h - &kron(&pauli(*ak), &pauli(*al)).scale(j);
            }
        }
    }
    h
}

/// Isotropic two-spin Hamiltonian
/// `-J sigma_1 . sigma_2 - B (sigma^z_1 + sigma^z_2)`.
pub fn heisenberg_hamiltonian<T: Real>(j: T, b: T) -> HermitianOperator<T> {
    heisenberg_with_coupling(&Matrix3::from_diagonal_element(j), b)
}

/// Polar and azimuthal angles on one Bloch sphere, away from the poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochCoords<T: Real> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> BlochCoords<T> {
    /// Requires `theta` strictly inside `(0, pi)`; `phi` is wrapped into
    /// `[0, 2 pi)`.
    pub fn new(theta: T, phi: T) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidCoordinates("non-finite Bloch angle".into()));
        }
        if theta <= T::zero() || theta >= T::pi() {
            return Err(Error::ChartSingularity(format!(
                "theta = {} is outside the open interval (0, pi)",
                crate::scalar::to_f64(theta)
            )));
        }
        Ok(Self { theta, phi: wrap_angle(phi) })
    }

    /// `(<sigma_x>, <sigma_y>, <sigma_z>)`.
    pub fn bloch_vector(&self) -> [T; 3] {
        let s = self.theta.sin();
        [s * self.phi.cos(), s * self.phi.sin(), self.theta.cos()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSphereCoords<T: Real> {
    pub first: BlochCoords<T>,
    pub second: BlochCoords<T>,
}

impl<T: Real> TwoSphereCoords<T> {
    pub fn new(theta1: T, phi1: T, theta2: T, phi2: T) -> Result<Self> {
        Ok(Self { first: BlochCoords::new(theta1, phi1)?, second: BlochCoords::new(theta2, phi2)? })
    }
}

/// Wraps into `[0, 2 pi)`.
pub fn wrap_angle<T: Real>(phi: T) -> T {
    let two_pi = T::two_pi();
    let mut w = phi % two_pi;
    if w < T::zero() {
        w += two_pi;
    }
    if w >= two_pi {
        w -= two_pi;
    }
    w
}

/// `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>` for any real angles,
/// including the poles.
pub fn bloch_state_at<T: Real>(theta: T, phi: T) -> PureState<T> {
    let half = theta * lit(0.5);
    PureState::from_slice(&[Complex::new(half.cos(), T::zero()), phase(phi) * Complex::new(half.sin(), T::zero())])
        .expect("Bloch embedding is normalized")
}

pub fn bloch_state<T: Real>(c: &BlochCoords<T>) -> PureState<T> {
    bloch_state_at(c.theta, c.phi)
}

/// `|s_1> (x) |s_2>`.
pub fn product_state<T: Real>(c: &TwoSphereCoords<T>) -> PureState<T> {
    let a = bloch_state(&c.first);
    let b = bloch_state(&c.second);
    PureState::new(a.amplitudes().kronecker(b.amplitudes())).expect("product of unit vectors")
}

/// Bloch vector of a single-qubit state.
pub fn bloch_vector<T: Real>(x: &PureState<T>) -> Result<[T; 3]> {
    check_dim(2, x.dim())?;
    Ok([expectation(&pauli(Axis::X), x)?, expectation(&pauli(Axis::Y), x)?, expectation(&pauli(Axis::Z), x)?])
}

/// Reduced Bloch vectors `(<sigma^k (x) 1>, <1 (x) sigma^k>)` of a two-qubit
/// state.
pub fn reduced_bloch_vectors<T: Real>(x: &PureState<T>) -> Result<([T; 3], [T; 3])> {
    check_dim(4, x.dim())?;
    let id = identity::<T>(2);
    let mut first = [T::zero(); 3];
    let mut second = [T::zero(); 3];
    for (k, axis) in Axis::ALL.iter().enumerate() {
        let s = pauli::<T>(*axis);
        first[k] = expectation(&kron(&s, &id), x)?;
        second[k] = expectation(&kron(&id, &s), x)?;
    }
    Ok((first, second))
}

/// `(theta, phi)` of a Bloch vector (any positive length); `phi` in
/// `(-pi, pi]`.
pub fn bloch_angles<T: Real>(r: [T; 3]) -> (T, T) {
    let rho = (r[0] * r[0] + r[1] * r[1]).sqrt();
    (rho.atan2(r[2]), r[1].atan2(r[0]))
}

/// Angular velocity `(theta_dot, phi_dot)` of a moving Bloch vector.
pub fn bloch_velocity<T: Real>(r: [T; 3], r_dot: [T; 3]) -> Result<(T, T)> {
    let rho2 = r[0] * r[0] + r[1] * r[1];
    let len2 = rho2 + r[2] * r[2];
    if rho2 < lit::<T>(1e-24) * len2.max(T::one()) {
        return Err(Error::ChartSingularity("Bloch vector lies on the polar axis".into()));
    }
    let rho = rho2.sqrt();
    // theta = atan2(rho, z)
    let rho_dot = (r[0] * r_dot[0] + r[1] * r_dot[1]) / rho;
    let theta_dot = (r[2] * rho_dot - rho * r_dot[2]) / len2;
    let phi_dot = (r[0] * r_dot[1] - r[1] * r_dot[0]) / rho2;
    Ok((theta_dot, phi_dot))
}

/// Rate of change of the qubit Bloch vector along `v`.
pub fn bloch_vector_rate<T: Real>(v: &TangentVector<T>) -> Result<[T; 3]> {
    check_dim(2, v.base().dim())?;
    Ok([v.derivative_of(&pauli(Axis::X))?, v.derivative_of(&pauli(Axis::Y))?, v.derivative_of(&pauli(Axis::Z))?])
}

/// Rates of the two reduced Bloch vectors along `v`.
pub fn reduced_bloch_rates<T: Real>(v: &TangentVector<T>) -> Result<([T; 3], [T; 3])> {
    check_dim(4, v.base().dim())?;
    let id = identity::<T>(2);
    let mut first = [T::zero(); 3];
    let mut second = [T::zero(); 3];
    for (k, axis) in Axis::ALL.iter().enumerate() {
        let s = pauli::<T>(*axis);
        first[k] = v.derivative_of(&kron(&s, &id))?;
        second[k] = v.derivative_of(&kron(&id, &s))?;
    }
    Ok((first, second))
}
