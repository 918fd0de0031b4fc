use nalgebra::DVector;
use num_complex::Complex;

use super::{HermitianOperator, PureState};
use crate::error::{check_dim, Error, Result};
use crate::scalar::{arg, cabs, cabs2, lit, phase, to_f64, Real};

/// Action-angle chart relative to an ordered energy basis
/// `|E_1>, ..., |E_{n+1}>`: the state is
/// `sum_i sqrt(p_i) e^{-i q_i} |E_i> + sqrt(1 - sum p_i) |E_{n+1}>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionAngleCoords<T: Real> {
    p: Vec<T>,
    q: Vec<T>,
}

impl<T: Real> ActionAngleCoords<T> {
    pub fn new(p: Vec<T>, q: Vec<T>) -> Result<Self> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::InvalidCoordinates(format!(
                "need equal, nonzero numbers of actions and angles (got {} and {})",
                p.len(),
                q.len()
            )));
        }
        if p.iter().chain(q.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCoordinates("non-finite coordinate".into()));
        }
        if p.iter().any(|&v| v < T::zero()) {
            return Err(Error::InvalidCoordinates("actions must be nonnegative".into()));
        }
        let total = p.iter().fold(T::zero(), |a, &b| a + b);
        if total > T::one() + lit(1e-12) {
            return Err(Error::InvalidCoordinates(format!("sum of actions {} exceeds 1", to_f64(total))));
        }
        Ok(Self { p, q })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn actions(&self) -> &[T] {
        &self.p
    }

    pub fn angles(&self) -> &[T] {
        &self.q
    }

    /// Energy `E_{n+1} + sum_i omega_i p_i` for the given spectrum.
    pub fn energy(&self, energies: &[T]) -> Result<T> {
        check_dim(self.n() + 1, energies.len())?;
        let omega = frequencies(energies);
        Ok(self.p.iter().zip(&omega).fold(energies[self.n()], |acc, (&p, &w)| acc + w * p))
    }
}

/// `omega_i = E_i - E_{n+1}` for `i = 1..n`.
pub fn frequencies<T: Real>(energies: &[T]) -> Vec<T> {
    match energies.split_last() {
        Some((&last, rest)) => rest.iter().map(|&e| e - last).collect(),
        None => Vec::new(),
    }
}

/// Eigen-decomposition of `h` as `(E_j, |E_j>)` pairs, ascending.
pub fn energy_basis<T: Real>(h: &HermitianOperator<T>) -> Result<(Vec<T>, Vec<PureState<T>>)> {
    let (values, vectors) = h.eigen();
    let basis = (0..h.dim()).map(|j| PureState::new(vectors.column(j).into_owned())).collect::<Result<Vec<_>>>()?;
    Ok((values, basis))
}

pub fn check_orthonormal<T: Real>(basis: &[PureState<T>]) -> Result<()> {
    let mut deviation = T::zero();
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let target = if i == j { T::one() } else { T::zero() };
            deviation = deviation.max(cabs(a.amplitudes().dotc(b.amplitudes()) - Complex::new(target, T::zero())));
        }
    }
    if deviation > lit(1e-10) {
        return Err(Error::Basis { deviation: to_f64(deviation) });
    }
    Ok(())
}

fn check_basis<T: Real>(n: usize, basis: &[PureState<T>]) -> Result<()> {
    check_dim(n + 1, basis.len())?;
    for b in basis {
        check_dim(basis.len(), b.dim())?;
    }
    check_orthonormal(basis)
}

pub fn action_angle_state<T: Real>(coords: &ActionAngleCoords<T>, basis: &[PureState<T>]) -> Result<PureState<T>> {
    let n = coords.n();
    check_basis(n, basis)?;
    let total = coords.p.iter().fold(T::zero(), |a, &b| a + b);
    let rest = (T::one() - total).max(T::zero()).sqrt();
    let mut v = basis[n].amplitudes().map(|z| z * Complex::new(rest, T::zero()));
    for i in 0..n {
        let w = phase(-coords.q[i]) * Complex::new(coords.p[i].sqrt(), T::zero());
        v += basis[i].amplitudes().map(|z| z * w);
    }
    PureState::new(v)
}

/// Inverse of [`action_angle_state`]; angles are wrapped into `(-pi, pi]`.
pub fn action_angle_coords<T: Real>(x: &PureState<T>, basis: &[PureState<T>]) -> Result<ActionAngleCoords<T>> {
    if basis.is_empty() {
        return Err(Error::InvalidInput("empty basis".into()));
    }
    let n = basis.len() - 1;
    check_basis(n, basis)?;
    check_dim(basis.len(), x.dim())?;
    let comps: DVector<Complex<T>> =
        DVector::from_iterator(n + 1, basis.iter().map(|b| b.amplitudes().dotc(x.amplitudes())));
    let reference = comps[n];
    if cabs(reference) < lit(1e-12) {
        return Err(Error::InvalidCoordinates("angles undefined: no weight on the reference level".into()));
    }
    let norm2 = comps.iter().fold(T::zero(), |a, z| a + cabs2(*z));
    let p = (0..n).map(|i| cabs2(comps[i]) / norm2).collect();
    let q = (0..n)
        .map(|i| {
            let z = comps[i];
            if cabs(z) == T::zero() {
                T::zero()
            } else {
                // arg(c_{n+1}) - arg(c_i), evaluated as one complex quotient
                arg(reference * z.conj())
            }
        })
        .collect();
    ActionAngleCoords::new(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_basis(n: usize) -> Vec<PureState<f64>> {
        (0..n).map(|k| PureState::basis(n, k).unwrap()).collect()
    }

    #[test]
    fn zero_actions_give_reference_level() {
        let coords = ActionAngleCoords::new(vec![0.0, 0.0], vec![0.3, -1.0]).unwrap();
        let x = action_angle_state(&coords, &std_basis(3)).unwrap();
        assert_eq!(x, PureState::basis(3, 2).unwrap());
    }

    #[test]
    fn equal_superposition() {
        let coords = ActionAngleCoords::new(vec![0.5], vec![0.0]).unwrap();
        let x = action_angle_state(&coords, &std_basis(2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((x.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((x.amplitudes()[1].re - h).abs() < 1e-15);
    }

    #[test]
    fn energy_matches_expectation() {
        let coords = ActionAngleCoords::new(vec![0.25], vec![0.7]).unwrap();
        let energies = [1.0, -1.0];
        let h = HermitianOperator::diagonal(&energies).unwrap();
        let x = action_angle_state(&coords, &std_basis(2)).unwrap();
        let e = super::super::expectation(&h, &x).unwrap();
        assert!((e + 0.5).abs() < 1e-12);
        assert!((coords.energy(&energies).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_coordinates() {
        assert!(matches!(ActionAngleCoords::new(vec![0.7, 0.6], vec![0.0, 0.0]), Err(Error::InvalidCoordinates(_))));
        assert!(ActionAngleCoords::new(vec![-0.1], vec![0.0]).is_err());
    }

    #[test]
    fn rejects_non_orthonormal_basis() {
        let coords = ActionAngleCoords::new(vec![0.5], vec![0.0]).unwrap();
        let b = vec![PureState::basis(2, 0).unwrap(), PureState::basis(2, 0).unwrap()];
        assert!(matches!(action_angle_state(&coords, &b), Err(Error::Basis { .. })));
    }

    #[test]
    fn coordinates_round_trip() {
        let coords = ActionAngleCoords::new(vec![0.1, 0.3, 0.2], vec![0.4, -2.0, 3.0]).unwrap();
        let basis = std_basis(4);
        let x = action_angle_state(&coords, &basis).unwrap();
        let back = action_angle_coords(&x.with_phase(1.234), &basis).unwrap();
        for i in 0..3 {
            assert!((back.actions()[i] - coords.actions()[i]).abs() < 1e-14);
            assert!((back.angles()[i] - coords.angles()[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn frequencies_relative_to_last() {
        assert_eq!(frequencies(&[3.0, 1.0, -1.0]), vec![4.0, 2.0]);
    }
}
