#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qconstrain::geometry::{HermitianOperator, PureState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> HermitianOperator<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    HermitianOperator::new((&a + a.adjoint()) * c(0.5, 0.0)).unwrap()
}

pub fn random_amplitudes(dim: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    DVector::from_fn(dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_state(dim: usize, rng: &mut impl Rng) -> PureState<f64> {
    PureState::new(random_amplitudes(dim, rng)).unwrap()
}

/// Bloch angles with `theta` in `[margin, pi - margin]`.
pub fn random_bloch(rng: &mut impl Rng, margin: f64) -> (f64, f64) {
    (rng.random_range(margin..std::f64::consts::PI - margin), rng.random_range(0.0..std::f64::consts::TAU))
}

/// `<x|A|x> / <x|x>` by plain matrix arithmetic.
pub fn oracle_expectation(a: &DMatrix<Complex64>, x: &DVector<Complex64>) -> Complex64 {
    (x.adjoint() * a * x)[(0, 0)] / x.norm_squared()
}

/// `-i <[F, G]>` from explicit matrix products.
pub fn oracle_commutator(f: &HermitianOperator<f64>, g: &HermitianOperator<f64>, x: &DVector<Complex64>) -> f64 {
    let (f, g) = (f.matrix(), g.matrix());
    let comm = f * g - g * f;
    (c(0.0, -1.0) * oracle_expectation(&comm, x)).re
}

/// `1/2 <{F, G}> - <F><G>` from explicit matrix products.
pub fn oracle_covariance(f: &HermitianOperator<f64>, g: &HermitianOperator<f64>, x: &DVector<Complex64>) -> f64 {
    let (fm, gm) = (f.matrix(), g.matrix());
    let anti = fm * gm + gm * fm;
    0.5 * oracle_expectation(&anti, x).re - oracle_expectation(fm, x).re * oracle_expectation(gm, x).re
}

/// Pauli matrices written out by hand.
pub fn sx() -> HermitianOperator<f64> {
    HermitianOperator::new(DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])).unwrap()
}

pub fn sy() -> HermitianOperator<f64> {
    HermitianOperator::new(DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])).unwrap()
}

pub fn sz() -> HermitianOperator<f64> {
    HermitianOperator::new(DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])).unwrap()
}

/// `cos(t/2)|0> + e^{ip} sin(t/2)|1>` written out by hand.
pub fn bloch(theta: f64, phi: f64) -> PureState<f64> {
    PureState::from_slice(&[c((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)]).unwrap()
}

/// Closed-form Example 2 velocity, typed in independently of the library.
pub fn example2_oracle(theta: f64, phi: f64) -> (f64, f64) {
    let d = 1.0 - theta.sin().powi(2) * phi.cos().powi(2);
    (0.5 * (2.0 * theta).sin() * (2.0 * phi).sin() / d, 2.0 * theta.cos().powi(2) * phi.cos().powi(2) / d)
}

/// Bloch-angle rates of a qubit tangent vector, by differentiating the
/// Bloch vector `(<sx>, <sy>, <sz>)` with finite differences along the
/// curve `x + s v`.
pub fn bloch_rates_fd(x: &PureState<f64>, v: &DVector<Complex64>) -> (f64, f64) {
    let angles = |s: f64| {
        let y = x.amplitudes() + v * c(s, 0.0);
        let r: Vec<f64> = [sx(), sy(), sz()].iter().map(|p| oracle_expectation(p.matrix(), &y).re).collect();
        let theta = (r[0].hypot(r[1])).atan2(r[2]);
        let phi = r[1].atan2(r[0]);
        (theta, phi)
    };
    let h = 1e-6;
    let (tp, pp) = angles(h);
    let (tm, pm) = angles(-h);
    let mut dp = pp - pm;
    if dp > std::f64::consts::PI {
        dp -= std::f64::consts::TAU;
    } else if dp < -std::f64::consts::PI {
        dp += std::f64::consts::TAU;
    }
    ((tp - tm) / (2.0 * h), dp / (2.0 * h))
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}
