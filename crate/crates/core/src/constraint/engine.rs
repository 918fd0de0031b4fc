//! Lagrange-multiplier engines.
//!
//! With `a_i` the horizontal gradient representer of constraint `i`
//! (see [`Constraint::gradient_representer`]):
//!
//! * `omega^ij = 2 Im <a_i|a_j>` and `M^ij = Re <a_i|a_j>`;
//! * `b_k = dPhi^k(X_H)`;
//! * symplectic: `omega lambda = -b`, field `X_H + lambda_i X_{Phi^i}`;
//! * metric: `M lambda = b`, field `X_H - lambda_i Y_{Phi^i}`.
//!
//! Both choices make `dPhi^k/dt = 0` along the resulting field.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::constraint::{Constraint, ConstraintSet};
use crate::error::{check_dim, Error, Result, Singularity};
use crate::geometry::{hamiltonian_vector_field, HermitianOperator, PureState, TangentVector};
use crate::scalar::{lit, to_f64, Real};

/// A constraint matrix is singular when its smallest singular value is below
/// this fraction of `max(largest singular value, constraint scale)`.
pub const SINGULARITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSolution<T: Real> {
    pub lambdas: DVector<T>,
    /// `omega^ij` or `M^ij`.
    pub matrix_used: DMatrix<T>,
    /// Ratio of largest to smallest singular value.
    pub condition_estimate: T,
}

struct Evaluated<T: Real> {
    representers: Vec<DVector<Complex<T>>>,
    free: TangentVector<T>,
    /// `dPhi^k(X_H)`.
    drive: DVector<T>,
}

impl<T: Real> Evaluated<T> {
    fn new(cs: &ConstraintSet<T>, h: &HermitianOperator<T>, x: &PureState<T>) -> Result<Self> {
        check_dim(cs.dim(), x.dim())?;
        check_dim(h.dim(), x.dim())?;
        let representers = cs.representers(x)?;
        let free = hamiltonian_vector_field(h, x)?;
        let two: T = lit(2.0);
        let drive =
            DVector::from_iterator(representers.len(), representers.iter().map(|a| two * a.dotc(free.components()).re));
        Ok(Self { representers, free, drive })
    }
}

fn omega_from<T: Real>(reps: &[DVector<Complex<T>>]) -> DMatrix<T> {
    let n = reps.len();
    let two: T = lit(2.0);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = two * reps[i].dotc(&reps[j]).im;
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

fn m_from<T: Real>(reps: &[DVector<Complex<T>>]) -> DMatrix<T> {
    let n = reps.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = reps[i].dotc(&reps[j]).re;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// `omega^ij = Omega^ab d_a Phi^i d_b Phi^j`, antisymmetric.
pub fn omega_matrix<T: Real>(cs: &ConstraintSet<T>, x: &PureState<T>) -> Result<DMatrix<T>> {
    check_dim(cs.dim(), x.dim())?;
    Ok(omega_from(&cs.representers(x)?))
}

/// `M^ij = g^ab d_a Phi^i d_b Phi^j`, symmetric positive semidefinite.
pub fn m_matrix<T: Real>(cs: &ConstraintSet<T>, x: &PureState<T>) -> Result<DMatrix<T>> {
    check_dim(cs.dim(), x.dim())?;
    Ok(m_from(&cs.representers(x)?))
}

/// Singular-value screen followed by an LU solve. Returns the solution and
/// the condition estimate.
pub(crate) fn solve_checked<T: Real>(matrix: &DMatrix<T>, rhs: &DMatrix<T>, scale: T) -> Result<(DMatrix<T>, T)> {
    let sv = matrix.clone().singular_values();
    let largest = sv.max();
    let smallest = sv.min();
    let floor = largest.max(scale);
    let singular = |s: T| s < lit::<T>(SINGULARITY_TOLERANCE) * floor || !(floor > T::zero());
    if singular(smallest) {
        return Err(Error::SingularConstraintMatrix(Singularity::IllConditioned {
            smallest: to_f64(smallest),
            largest: to_f64(largest),
        }));
    }
    let solution = matrix.clone().lu().solve(rhs).ok_or_else(|| {
        Error::SingularConstraintMatrix(Singularity::IllConditioned {
            smallest: to_f64(smallest),
            largest: to_f64(largest),
        })
    })?;
    Ok((solution, largest / smallest))
}

pub(crate) fn check_even<T: Real>(cs: &ConstraintSet<T>) -> Result<()> {
    if !cs.len().is_multiple_of(2) {
        return Err(Error::SingularConstraintMatrix(Singularity::OddConstraintCount(cs.len())));
    }
    Ok(())
}

fn symplectic_from<T: Real>(cs: &ConstraintSet<T>, ev: &Evaluated<T>) -> Result<MultiplierSolution<T>> {
    check_even(cs)?;
    let omega = omega_from(&ev.representers);
    let rhs = DMatrix::from_column_slice(ev.drive.len(), 1, (-&ev.drive).as_slice());
    let (sol, cond) = solve_checked(&omega, &rhs, cs.scale())?;
    Ok(MultiplierSolution { lambdas: sol.column(0).into_owned(), matrix_used: omega, condition_estimate: cond })
}

fn metric_from<T: Real>(cs: &ConstraintSet<T>, ev: &Evaluated<T>) -> Result<MultiplierSolution<T>> {
    let m = m_from(&ev.representers);
    let rhs = DMatrix::from_column_slice(ev.drive.len(), 1, ev.drive.as_slice());
    let (sol, cond) = solve_checked(&m, &rhs, cs.scale())?;
    Ok(MultiplierSolution { lambdas: sol.column(0).into_owned(), matrix_used: m, condition_estimate: cond })
}

/// Multipliers of the symplectic (Dirac) method.
pub fn symplectic_multipliers<T: Real>(
    cs: &ConstraintSet<T>,
    h: &HermitianOperator<T>,
    x: &PureState<T>,
) -> Result<MultiplierSolution<T>> {
    check_even(cs)?;
    symplectic_from(cs, &Evaluated::new(cs, h, x)?)
}

/// Multipliers of the metric method.
pub fn metric_multipliers<T: Real>(
    cs: &ConstraintSet<T>,
    h: &HermitianOperator<T>,
    x: &PureState<T>,
) -> Result<MultiplierSolution<T>> {
    metric_from(cs, &Evaluated::new(cs, h, x)?)
}

fn combine<T: Real>(
    free: &TangentVector<T>,
    reps: &[DVector<Complex<T>>],
    coefficients: impl Iterator<Item = Complex<T>>,
) -> TangentVector<T> {
    let mut comps = free.components().clone();
    for (a, c) in reps.iter().zip(coefficients) {
        comps += a.map(|z| z * c);
    }
    TangentVector::from_parts(free.base().clone(), comps)
}

fn symplectic_field_from<T: Real>(ev: &Evaluated<T>, sol: &MultiplierSolution<T>) -> TangentVector<T> {
    // lambda_i X_{Phi^i} = lambda_i (-i a_i)
    combine(&ev.free, &ev.representers, sol.lambdas.iter().map(|&l| Complex::new(T::zero(), -l)))
}

fn metric_field_from<T: Real>(ev: &Evaluated<T>, sol: &MultiplierSolution<T>) -> TangentVector<T> {
    // -lambda_i Y_{Phi^i} = -lambda_i a_i / 2
    let half: T = lit(0.5);
    combine(&ev.free, &ev.representers, sol.lambdas.iter().map(|&l| Complex::new(-half * l, T::zero())))
}

pub fn symplectic_constrained_field<T: Real>(
    cs: &ConstraintSet<T>,
    h: &HermitianOperator<T>,
    x: &PureState<T>,
) -> Result<TangentVector<T>> {
    check_even(cs)?;
    let ev = Evaluated::new(cs, h, x)?;
    let sol = symplectic_from(cs, &ev)?;
    Ok(symplectic_field_from(&ev, &sol))
}

pub fn metric_constrained_field<T: Real>(
    cs: &ConstraintSet<T>,
    h: &HermitianOperator<T>,
    x: &PureState<T>,
) -> Result<TangentVector<T>> {
    let ev = Evaluated::new(cs, h, x)?;
    let sol = metric_from(cs, &ev)?;
    Ok(metric_field_from(&ev, &sol))
}

/// Directional derivative of a constraint along a tangent vector.
pub fn constraint_derivative<T: Real>(c: &Constraint<T>, v: &TangentVector<T>) -> Result<T> {
    let a = c.gradient_representer(v.base())?;
    Ok(lit::<T>(2.0) * a.dotc(v.components()).re)
}

/// Unconstrained or constrained Schrodinger flow.
#[derive(Debug, Clone)]
pub enum Flow<T: Real> {
    Free { hamiltonian: HermitianOperator<T> },
    Symplectic { constraints: ConstraintSet<T>, hamiltonian: HermitianOperator<T> },
    Metric { constraints: ConstraintSet<T>, hamiltonian: HermitianOperator<T> },
}

#[derive(Debug, Clone)]
pub struct FlowVelocity<T: Real> {
    pub vector: TangentVector<T>,
    pub condition: T,
}

impl<T: Real> Flow<T> {
    /// Symplectic flow; rejects odd constraint counts immediately.
    pub fn symplectic(constraints: ConstraintSet<T>, hamiltonian: HermitianOperator<T>) -> Result<Self> {
        check_even(&constraints)?;
        check_dim(constraints.dim(), hamiltonian.dim())?;
        Ok(Flow::Symplectic { constraints, hamiltonian })
    }

    pub fn metric(constraints: ConstraintSet<T>, hamiltonian: HermitianOperator<T>) -> Result<Self> {
        check_dim(constraints.dim(), hamiltonian.dim())?;
        Ok(Flow::Metric { constraints, hamiltonian })
    }

    pub fn hamiltonian(&self) -> &HermitianOperator<T> {
        match self {
            Flow::Free { hamiltonian } | Flow::Symplectic { hamiltonian, .. } | Flow::Metric { hamiltonian, .. } => {
                hamiltonian
            }
        }
    }

    pub fn constraints(&self) -> Option<&ConstraintSet<T>> {
        match self {
            Flow::Free { .. } => None,
            Flow::Symplectic { constraints, .. } | Flow::Metric { constraints, .. } => Some(constraints),
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian().dim()
    }

    pub fn velocity(&self, x: &PureState<T>) -> Result<FlowVelocity<T>> {
        match self {
            Flow::Free { hamiltonian } => {
                Ok(FlowVelocity { vector: hamiltonian_vector_field(hamiltonian, x)?, condition: T::one() })
            }
            Flow::Symplectic { constraints, hamiltonian } => {
                let ev = Evaluated::new(constraints, hamiltonian, x)?;
                let sol = symplectic_from(constraints, &ev)?;
                Ok(FlowVelocity { vector: symplectic_field_from(&ev, &sol), condition: sol.condition_estimate })
            }
            Flow::Metric { constraints, hamiltonian } => {
                let ev = Evaluated::new(constraints, hamiltonian, x)?;
                let sol = metric_from(constraints, &ev)?;
                Ok(FlowVelocity { vector: metric_field_from(&ev, &sol), condition: sol.condition_estimate })
            }
        }
    }
}
