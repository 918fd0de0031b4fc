use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{check_dim, Error, Result};
use crate::scalar::{cabs, cabs2, lit, to_f64, Real};

/// Squared-norm deviation above which a representative is renormalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Point of projective Hilbert space, stored as a unit-norm representative.
///
/// Every quantity derived from a state is invariant under multiplying the
/// representative by a phase, so equality of two `PureState`s as vectors is
/// stricter than equality of the rays they represent.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: DVector<Complex<T>>,
}

impl<T: Real> PureState<T> {
    pub fn new(amplitudes: DVector<Complex<T>>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidInput(format!("state dimension must be at least 2, got {}", amplitudes.len())));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("state has non-finite amplitudes".into()));
        }
        let norm2 = norm_squared(&amplitudes);
        if norm2 == T::zero() {
            return Err(Error::InvalidInput("zero vector does not define a state".into()));
        }
        let mut state = Self { amplitudes };
        state.renormalize_if_needed(norm2);
        Ok(state)
    }

    pub fn from_slice(amplitudes: &[Complex<T>]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|k>`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidInput(format!("basis index {k} out of range for dim {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[k] = Complex::new(T::one(), T::zero());
        Self::new(v)
    }

    /// Interprets `[re0, im0, re1, im1, ...]` as a state.
    pub fn from_real_vector(y: &DVector<T>) -> Result<Self> {
        if !y.len().is_multiple_of(2) {
            return Err(Error::InvalidInput("flattened state must have even length".into()));
        }
        Self::new(unflatten(y))
    }

    pub fn to_real_vector(&self) -> DVector<T> {
        flatten(&self.amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Same ray, representative multiplied by `exp(i angle)`.
    pub fn with_phase(&self, angle: T) -> Self {
        let p = crate::scalar::phase(angle);
        Self { amplitudes: self.amplitudes.map(|z| z * p) }
    }

    /// Index of the largest-modulus amplitude, lowest index on ties.
    pub fn gauge_index(&self) -> usize {
        let mut best = 0;
        let mut best_mod = cabs2(self.amplitudes[0]);
        for (i, z) in self.amplitudes.iter().enumerate().skip(1) {
            let m = cabs2(*z);
            if m > best_mod {
                best = i;
                best_mod = m;
            }
        }
        best
    }

    /// Representative whose gauge amplitude is real and nonnegative.
    pub fn gauge_fixed(&self) -> Self {
        let z = self.amplitudes[self.gauge_index()];
        let r = cabs(z);
        if r == T::zero() {
            return self.clone();
        }
        let rot = z.conj() / Complex::new(r, T::zero());
        Self { amplitudes: self.amplitudes.map(|a| a * rot) }
    }

    fn renormalize_if_needed(&mut self, norm2: T) {
        if (norm2 - T::one()).abs() > lit(NORMALIZATION_TOLERANCE) {
            let s = Complex::new(T::one() / norm2.sqrt(), T::zero());
            self.amplitudes.iter_mut().for_each(|z| *z *= s);
        }
    }
}

/// Velocity at a point of state space: a vector orthogonal to its base
/// representative.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T: Real> {
    base: PureState<T>,
    components: DVector<Complex<T>>,
}

impl<T: Real> TangentVector<T> {
    pub fn new(base: PureState<T>, components: DVector<Complex<T>>) -> Result<Self> {
        check_dim(base.dim(), components.len())?;
        let overlap = cabs(base.amplitudes().dotc(&components));
        let scale = norm_squared(&components).sqrt().max(T::one());
        if overlap > lit::<T>(1e-10) * scale {
            return Err(Error::NotTangent { overlap: to_f64(overlap) });
        }
        Ok(Self { base, components })
    }

    /// Removes the component along the base state.
    pub fn project(base: PureState<T>, components: DVector<Complex<T>>) -> Result<Self> {
        check_dim(base.dim(), components.len())?;
        let along = base.amplitudes().dotc(&components);
        let components = components - base.amplitudes() * along;
        Ok(Self { base, components })
    }

    pub fn zero(base: PureState<T>) -> Self {
        let components = DVector::zeros(base.dim());
        Self { base, components }
    }

    pub(crate) fn from_parts(base: PureState<T>, components: DVector<Complex<T>>) -> Self {
        Self { base, components }
    }

    pub fn base(&self) -> &PureState<T> {
        &self.base
    }

    pub fn components(&self) -> &DVector<Complex<T>> {
        &self.components
    }

    pub fn norm_squared(&self) -> T {
        norm_squared(&self.components)
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    /// Directional derivative of the expectation function of `op` along this
    /// vector: `2 Re <x|op|v>`.
    pub fn derivative_of(&self, op: &super::HermitianOperator<T>) -> Result<T> {
        check_dim(op.dim(), self.base.dim())?;
        let fx = op.apply(self.base.amplitudes());
        Ok(lit::<T>(2.0) * fx.dotc(&self.components).re)
    }

    /// `self + factor * other`; both must share a base.
    pub fn add_scaled(&self, factor: T, other: &Self) -> Result<Self> {
        check_dim(self.base.dim(), other.base.dim())?;
        let f = Complex::new(factor, T::zero());
        Ok(Self { base: self.base.clone(), components: &self.components + other.components.map(|z| z * f) })
    }

    pub fn scaled(&self, factor: T) -> Self {
        let f = Complex::new(factor, T::zero());
        Self { base: self.base.clone(), components: self.components.map(|z| z * f) }
    }
}

pub(crate) fn norm_squared<T: Real>(v: &DVector<Complex<T>>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + cabs2(*z))
}

pub fn flatten<T: Real>(v: &DVector<Complex<T>>) -> DVector<T> {
    DVector::from_iterator(2 * v.len(), v.iter().flat_map(|z| [z.re, z.im]))
}

pub fn unflatten<T: Real>(y: &DVector<T>) -> DVector<Complex<T>> {
    DVector::from_iterator(y.len() / 2, (0..y.len() / 2).map(|i| Complex::new(y[2 * i], y[2 * i + 1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_on_construction() {
        let x = PureState::<f64>::from_slice(&[Complex::new(3.0, 0.0), Complex::new(0.0, 4.0)]).unwrap();
        assert!((norm_squared(x.amplitudes()) - 1.0).abs() < 1e-15);
        assert!((x.amplitudes()[1].im - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_and_nan() {
        assert!(PureState::<f64>::from_slice(&[Complex::new(0.0, 0.0); 2]).is_err());
        assert!(PureState::from_slice(&[Complex::new(f64::NAN, 0.0), Complex::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn gauge_fix_tie_breaks_low_index() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = PureState::from_slice(&[Complex::new(0.0, h), Complex::new(h, 0.0)]).unwrap();
        assert_eq!(x.gauge_index(), 0);
        let g = x.gauge_fixed();
        assert!((g.amplitudes()[0].re - h).abs() < 1e-15 && g.amplitudes()[0].im.abs() < 1e-15);
        assert!((g.amplitudes()[1].im + h).abs() < 1e-15);
    }

    #[test]
    fn flatten_round_trip() {
        let x = PureState::from_slice(&[Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]).unwrap();
        let back = PureState::from_real_vector(&x.to_real_vector()).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn tangent_rejects_radial_component() {
        let x = PureState::<f64>::basis(2, 0).unwrap();
        let v = DVector::from_column_slice(&[Complex::new(0.5, 0.0), Complex::new(0.0, 0.0)]);
        assert!(matches!(TangentVector::new(x.clone(), v.clone()), Err(Error::NotTangent { .. })));
        let t = TangentVector::project(x, v).unwrap();
        assert!(t.norm() < 1e-15);
    }
}
