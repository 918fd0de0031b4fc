//! Real-coordinate charts on projective Hilbert space.
//!
//! A chart supplies an embedding `coords -> state` and its horizontal
//! differential. From the differential `v_a` the chart frame assembles the
//! real matrices used by the constraint engines:
//!
//! * metric `g_ab = 4 Re <v_a|v_b>` (the Fubini-Study metric, unit-radius
//!   Bloch sphere for a qubit) with inverse `g^ab`;
//! * symplectic form `Omega_ab = 2 Im <v_a|v_b>` with
//!   `Omega^ab` fixed by `Omega_ab Omega^bc = -delta_a^c`.
//!
//! With these, `Omega^ab d_a F d_b G` and `g^ab d_a F d_b G` reproduce the
//! commutator and covariance brackets of the geometry module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{norm_squared, HermitianOperator, PureState, TangentVector};
use crate::scalar::{cabs, lit, phase, to_f64, Real};

/// Relative rank threshold for the chart differential.
const RANK_TOLERANCE: f64 = 1e-12;

pub trait Chart<T: Real> {
    /// Dimension of the underlying Hilbert space.
    fn state_dim(&self) -> usize;

    /// Number of real coordinates (even).
    fn coord_dim(&self) -> usize;

    fn embed(&self, coords: &DVector<T>) -> Result<PureState<T>>;

    fn coords_of(&self, x: &PureState<T>) -> Result<DVector<T>>;

    /// Horizontal parts of the partial derivatives of [`Chart::embed`], one
    /// vector per coordinate, at `embed(coords)`.
    fn jacobian(&self, coords: &DVector<T>) -> Result<Vec<DVector<Complex<T>>>>;

    fn frame(&self, coords: &DVector<T>) -> Result<ChartFrame<T>> {
        ChartFrame::build(self.embed(coords)?, self.jacobian(coords)?)
    }

    /// Coordinate components of a tangent vector.
    fn pushforward(&self, v: &TangentVector<T>) -> Result<DVector<T>> {
        let coords = self.coords_of(v.base())?;
        self.frame(&coords)?.coordinates_of(v)
    }

    fn omega_matrix(&self, coords: &DVector<T>) -> Result<DMatrix<T>> {
        Ok(self.frame(coords)?.omega)
    }

    fn omega_inverse(&self, coords: &DVector<T>) -> Result<DMatrix<T>> {
        Ok(self.frame(coords)?.omega_inverse)
    }

    fn metric_matrix(&self, coords: &DVector<T>) -> Result<DMatrix<T>> {
        Ok(self.frame(coords)?.metric)
    }

    fn metric_inverse(&self, coords: &DVector<T>) -> Result<DMatrix<T>> {
        Ok(self.frame(coords)?.metric_inverse)
    }
}

/// Chart data evaluated at one point.
#[derive(Debug, Clone)]
pub struct ChartFrame<T: Real> {
    pub state: PureState<T>,
    pub basis: Vec<DVector<Complex<T>>>,
    /// `Re <v_a|v_b>`.
    pub gram: DMatrix<T>,
    pub metric: DMatrix<T>,
    pub metric_inverse: DMatrix<T>,
    pub omega: DMatrix<T>,
    pub omega_inverse: DMatrix<T>,
}

impl<T: Real> ChartFrame<T> {
    pub fn build(state: PureState<T>, basis: Vec<DVector<Complex<T>>>) -> Result<Self> {
        let n = basis.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("chart needs an even number of coordinates, got {n}")));
        }
        for v in &basis {
            check_dim(state.dim(), v.len())?;
        }
        let mut gram = DMatrix::zeros(n, n);
        let mut skew = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let z = basis[a].dotc(&basis[b]);
                gram[(a, b)] = z.re;
                skew[(a, b)] = z.im;
            }
        }
        let sv = gram.clone().singular_values();
        let largest = sv.max();
        let smallest = sv.min();
        if !(largest > T::zero()) || smallest < lit::<T>(RANK_TOLERANCE) * largest {
            return Err(Error::ChartSingularity(format!(
                "chart differential is rank deficient (singular values {:e}..{:e})",
                to_f64(smallest),
                to_f64(largest)
            )));
        }
        let metric = gram.scale(lit(4.0));
        let omega = skew.scale(lit(2.0));
        let metric_inverse =
            metric.clone().try_inverse().ok_or_else(|| Error::ChartSingularity("metric is not invertible".into()))?;
        let omega_inverse = -omega
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::ChartSingularity("symplectic form is degenerate".into()))?;
        Ok(Self { state, basis, gram, metric, metric_inverse, omega, omega_inverse })
    }

    pub fn coord_dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinate gradient `d_a F = 2 Re <a|v_a>` of a function whose
    /// horizontal gradient representer is `a` (at this frame's state).
    pub fn covector(&self, representer: &DVector<Complex<T>>) -> DVector<T> {
        let two: T = lit(2.0);
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|v| two * representer.dotc(v).re))
    }

    /// Coordinate gradient of the expectation function of `op`.
    pub fn gradient_of(&self, op: &HermitianOperator<T>) -> Result<DVector<T>> {
        check_dim(op.dim(), self.state.dim())?;
        Ok(self.covector(&op.apply(self.state.amplitudes())))
    }

    /// Tangent vector with coordinate components `u`.
    pub fn vector(&self, u: &DVector<T>) -> Result<TangentVector<T>> {
        check_dim(self.basis.len(), u.len())?;
        let mut comps = DVector::zeros(self.state.dim());
        for (ua, va) in u.iter().zip(&self.basis) {
            comps += va.map(|z| z * Complex::new(*ua, T::zero()));
        }
        TangentVector::project(self.state.clone(), comps)
    }

    /// Coordinate components of `v`, after aligning its base representative
    /// with this frame's state.
    pub fn coordinates_of(&self, v: &TangentVector<T>) -> Result<DVector<T>> {
        check_dim(self.state.dim(), v.base().dim())?;
        let w = align(v, &self.state)?;
        let rhs = DVector::from_iterator(self.basis.len(), self.basis.iter().map(|va| va.dotc(&w).re));
        self.gram.clone().lu().solve(&rhs).ok_or_else(|| Error::ChartSingularity("gram matrix is singular".into()))
    }

    /// `Omega^ab df_a dg_b`.
    pub fn symplectic_bracket(&self, df: &DVector<T>, dg: &DVector<T>) -> T {
        df.dot(&(&self.omega_inverse * dg))
    }

    /// `g^ab df_a dg_b`.
    pub fn metric_bracket(&self, df: &DVector<T>, dg: &DVector<T>) -> T {
        df.dot(&(&self.metric_inverse * dg))
    }
}

/// Components of `v` re-expressed at the representative `target` of the same
/// ray.
fn align<T: Real>(v: &TangentVector<T>, target: &PureState<T>) -> Result<DVector<Complex<T>>> {
    let overlap = v.base().amplitudes().dotc(target.amplitudes());
    let r = cabs(overlap);
    if r < lit(1.0 - 1e-8) {
        return Err(Error::InvalidInput("tangent vector is based at a different state".into()));
    }
    let rot = overlap / Complex::new(r, T::zero());
    Ok(v.components().map(|z| z * rot))
}

/// Affine chart `z_j = c_j / c_k` around the reference amplitude `k`.
///
/// Coordinates are `(Re z_j, Im z_j)` for `j != k` in increasing `j`. The
/// embedded representative has `c_k` real and positive, so evaluating a
/// function on `embed(coords)` evaluates it in the gauge where the reference
/// amplitude is real.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineChart {
    dim: usize,
    reference: usize,
}

impl AffineChart {
    pub fn new(dim: usize, reference: usize) -> Result<Self> {
        if dim < 2 || reference >= dim {
            return Err(Error::InvalidInput(format!(
                "affine chart needs dim >= 2 and reference < dim (got {dim}, {reference})"
            )));
        }
        Ok(Self { dim, reference })
    }

    /// Chart centred on the largest-modulus amplitude of `x` (lowest index on
    /// ties).
    pub fn gauge<T: Real>(x: &PureState<T>) -> Self {
        Self { dim: x.dim(), reference: x.gauge_index() }
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    /// Hilbert-space index of each complex coordinate.
    pub fn free_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).filter(move |&j| j != self.reference)
    }

    /// Unnormalized section `psi` with `psi_k = 1`.
    pub fn section<T: Real>(&self, coords: &DVector<T>) -> Result<DVector<Complex<T>>> {
        check_dim(2 * (self.dim - 1), coords.len())?;
        let mut psi = DVector::zeros(self.dim);
        psi[self.reference] = Complex::new(T::one(), T::zero());
        for (slot, j) in self.free_indices().enumerate() {
            psi[j] = Complex::new(coords[2 * slot], coords[2 * slot + 1]);
        }
        Ok(psi)
    }
}

impl<T: Real> Chart<T> for AffineChart {
    fn state_dim(&self) -> usize {
        self.dim
    }

    fn coord_dim(&self) -> usize {
        2 * (self.dim - 1)
    }

    fn embed(&self, coords: &DVector<T>) -> Result<PureState<T>> {
        PureState::new(self.section(coords)?)
    }

    fn coords_of(&self, x: &PureState<T>) -> Result<DVector<T>> {
        check_dim(self.dim, x.dim())?;
        let ck = x.amplitudes()[self.reference];
        if cabs(ck) < lit(1e-12) {
            return Err(Error::ChartSingularity(format!("reference amplitude {} vanishes", self.reference)));
        }
        let mut coords = DVector::zeros(<Self as Chart<T>>::coord_dim(self));
        for (slot, j) in self.free_indices().enumerate() {
            let z = x.amplitudes()[j] / ck;
            coords[2 * slot] = z.re;
            coords[2 * slot + 1] = z.im;
        }
        Ok(coords)
    }

    fn jacobian(&self, coords: &DVector<T>) -> Result<Vec<DVector<Complex<T>>>> {
        let psi = self.section(coords)?;
        let norm = norm_squared(&psi).sqrt();
        let x = psi.map(|z| z / Complex::new(norm, T::zero()));
        let inv = Complex::new(T::one() / norm, T::zero());
        let mut basis = Vec::with_capacity(2 * (self.dim - 1));
        for j in self.free_indices() {
            for unit in [Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::one())] {
                let mut d = DVector::zeros(self.dim);
                d[j] = unit * inv;
                let along = x.dotc(&d);
                basis.push(d - x.map(|z| z * along));
            }
        }
        Ok(basis)
    }

    /// Exact: `dz_j = (w_j c_k - c_j w_k) / c_k^2`.
    fn pushforward(&self, v: &TangentVector<T>) -> Result<DVector<T>> {
        check_dim(self.dim, v.base().dim())?;
        let c = v.base().amplitudes();
        let w = v.components();
        let ck = c[self.reference];
        if cabs(ck) < lit(1e-12) {
            return Err(Error::ChartSingularity(format!("reference amplitude {} vanishes", self.reference)));
        }
        let wk = w[self.reference];
        let mut out = DVector::zeros(2 * (self.dim - 1));
        for (slot, j) in self.free_indices().enumerate() {
            let dz = (w[j] * ck - c[j] * wk) / (ck * ck);
            out[2 * slot] = dz.re;
            out[2 * slot + 1] = dz.im;
        }
        Ok(out)
    }
}

/// Spherical chart `(theta, phi)` on the qubit state space, embedding
/// `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BlochChart;

impl<T: Real> Chart<T> for BlochChart {
    fn state_dim(&self) -> usize {
        2
    }

    fn coord_dim(&self) -> usize {
        2
    }

    fn embed(&self, coords: &DVector<T>) -> Result<PureState<T>> {
        check_dim(2, coords.len())?;
        let half = coords[0] * lit(0.5);
        PureState::from_slice(&[
            Complex::new(half.cos(), T::zero()),
            phase(coords[1]) * Complex::new(half.sin(), T::zero()),
        ])
    }

    fn coords_of(&self, x: &PureState<T>) -> Result<DVector<T>> {
        check_dim(2, x.dim())?;
        let c0 = x.amplitudes()[0];
        let c1 = x.amplitudes()[1];
        let theta = lit::<T>(2.0) * cabs(c1).atan2(cabs(c0));
        let rel = c1 * c0.conj();
        let mut phi = rel.im.atan2(rel.re);
        if phi < T::zero() {
            phi += T::two_pi();
        }
        Ok(DVector::from_vec(vec![theta, phi]))
    }

    fn jacobian(&self, coords: &DVector<T>) -> Result<Vec<DVector<Complex<T>>>> {
        check_dim(2, coords.len())?;
        if coords[0].sin().abs() < lit(1e-12) {
            return Err(Error::ChartSingularity("spherical chart is singular at the poles".into()));
        }
        let x = self.embed(coords)?;
        let half = coords[0] * lit(0.5);
        let e = phase(coords[1]);
        let h: T = lit(0.5);
        let d_theta = DVector::from_vec(vec![
            Complex::new(-h * half.sin(), T::zero()),
            e * Complex::new(h * half.cos(), T::zero()),
        ]);
        let d_phi =
            DVector::from_vec(vec![Complex::new(T::zero(), T::zero()), e * Complex::new(T::zero(), half.sin())]);
        Ok([d_theta, d_phi]
            .into_iter()
            .map(|d| {
                let along = x.amplitudes().dotc(&d);
                d - x.amplitudes().map(|z| z * along)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{commutator_bracket, covariance_bracket, hamiltonian_vector_field};
    use std::f64::consts::FRAC_PI_3;

    fn sx() -> HermitianOperator<f64> {
        HermitianOperator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sz() -> HermitianOperator<f64> {
        HermitianOperator::diagonal(&[1.0, -1.0]).unwrap()
    }

    #[test]
    fn bloch_metric_is_round_sphere() {
        let theta: f64 = 0.9;
        let g = BlochChart.metric_matrix(&DVector::from_vec(vec![theta, 0.4])).unwrap();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(g[(0, 1)].abs() < 1e-14);
        assert!((g[(1, 1)] - theta.sin().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn omega_times_inverse_is_minus_identity() {
        let chart = AffineChart::new(3, 1).unwrap();
        let coords = DVector::from_vec(vec![0.3, -0.2, 0.5, 0.7]);
        let f = chart.frame(&coords).unwrap();
        let prod = &f.omega * &f.omega_inverse;
        assert!((prod + DMatrix::<f64>::identity(4, 4)).norm() < 1e-8);
    }

    #[test]
    fn chart_brackets_match_operator_brackets() {
        let chart = BlochChart;
        let coords = DVector::from_vec(vec![FRAC_PI_3, 0.8]);
        let f = chart.frame(&coords).unwrap();
        let dx = f.gradient_of(&sx()).unwrap();
        let dz = f.gradient_of(&sz()).unwrap();
        let x = f.state.clone();
        assert!((f.symplectic_bracket(&dx, &dz) - commutator_bracket(&sx(), &sz(), &x).unwrap()).abs() < 1e-12);
        assert!((f.metric_bracket(&dx, &dz) - covariance_bracket(&sx(), &sz(), &x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn affine_round_trip_and_pushforward() {
        let chart = AffineChart::new(2, 0).unwrap();
        let coords = DVector::from_vec(vec![0.4, -0.3]);
        let x: PureState<f64> = chart.embed(&coords).unwrap();
        let back = chart.coords_of(&x.with_phase(0.77)).unwrap();
        assert!((back - &coords).norm() < 1e-14);
        let v = hamiltonian_vector_field(&sz(), &x).unwrap();
        let exact = chart.pushforward(&v).unwrap();
        let via_frame = chart.frame(&coords).unwrap().coordinates_of(&v).unwrap();
        assert!((exact - via_frame).norm() < 1e-12);
    }

    #[test]
    fn bloch_chart_singular_at_pole() {
        let r = BlochChart.jacobian(&DVector::from_vec(vec![0.0, 0.3f64]));
        assert!(matches!(r, Err(Error::ChartSingularity(_))));
    }

    #[test]
    fn affine_chart_singular_off_domain() {
        let chart = AffineChart::new(2, 0).unwrap();
        let r = chart.coords_of(&PureState::<f64>::basis(2, 1).unwrap());
        assert!(matches!(r, Err(Error::ChartSingularity(_))));
    }
}
