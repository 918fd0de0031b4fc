use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, lit, Real};

/// Inputs farther than this from Hermitian are rejected; closer ones are
/// symmetrized.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

/// Dense Hermitian matrix acting on an `n`-level Hilbert space, `n >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Real> {
    matrix: DMatrix<Complex<T>>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates and symmetrizes `matrix` as `(A + A^dagger) / 2`.
    pub fn new(matrix: DMatrix<Complex<T>>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::Dimension { expected: n, found: matrix.ncols() });
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("operator dimension must be at least 2, got {n}")));
        }
        let adjoint = matrix.adjoint();
        let mut deviation = T::zero();
        for (a, b) in matrix.iter().zip(adjoint.iter()) {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidInput("operator has non-finite entries".into()));
            }
            deviation = deviation.max(cabs(*a - *b));
        }
        if deviation > lit(HERMITICITY_TOLERANCE) {
            return Err(Error::NotHermitian { deviation: crate::scalar::to_f64(deviation) });
        }
        let half: T = lit(0.5);
        let matrix = (matrix + adjoint).map(|z| z * half);
        Ok(Self { matrix })
    }

    /// Builds an operator from real entries given row by row.
    pub fn from_real_rows(n: usize, rows: &[T]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::Dimension { expected: n * n, found: rows.len() });
        }
        Self::new(DMatrix::from_row_iterator(n, n, rows.iter().map(|&x| Complex::new(x, T::zero()))))
    }

    pub fn diagonal(values: &[T]) -> Result<Self> {
        let n = values.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    pub fn apply(&self, v: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        &self.matrix * v
    }

    /// Eigenvalues in ascending order with matching orthonormal eigenvectors
    /// as columns.
    pub fn eigen(&self) -> (Vec<T>, DMatrix<Complex<T>>) {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order
            .sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors =
            DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
        (values, vectors)
    }

    /// `(min, max)` of the spectrum.
    pub fn spectral_range(&self) -> (T, T) {
        let (values, _) = self.eigen();
        (values[0], values[values.len() - 1])
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> T {
        let (lo, hi) = self.spectral_range();
        lo.abs().max(hi.abs())
    }

    pub fn scale(&self, factor: T) -> Self {
        let f = Complex::new(factor, T::zero());
        Self { matrix: self.matrix.map(|z| z * f) }
    }

    pub fn commutes_with(&self, other: &Self, tol: T) -> bool {
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        c.iter().all(|z| cabs(*z) <= tol)
    }
}

impl<T: Real> Add for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;

    fn add(self, rhs: Self) -> HermitianOperator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        HermitianOperator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl<T: Real> Sub for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;

    fn sub(self, rhs: Self) -> HermitianOperator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        HermitianOperator { matrix: &self.matrix - &rhs.matrix }
    }
}

impl<T: Real> Mul<T> for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;

    fn mul(self, rhs: T) -> HermitianOperator<T> {
        self.scale(rhs)
    }
}
