use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex;

use super::chart::{AffineChart, Chart};
use super::fd::{finite_difference_gradient, DEFAULT_FD_STEP};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{centered_action, expectation, HermitianOperator, PureState};
use crate::scalar::{lit, to_f64, Real};

pub type ChartValueFn<T> = dyn Fn(&AffineChart, &DVector<T>) -> T + Send + Sync;
pub type ChartGradientFn<T> = dyn Fn(&AffineChart, &DVector<T>) -> DVector<T> + Send + Sync;

/// Constraint given as a real function of affine-chart coordinates.
///
/// It is always evaluated in the gauge chart of the current state
/// ([`AffineChart::gauge`]): the reference amplitude is the largest one and is
/// real. Functions such as `Re(c0 c3 - c1 c2)` are not phase invariant on
/// Hilbert space, only their zero sets are, so the gauge is part of the
/// definition.
#[derive(Clone)]
pub struct ChartFunction<T: Real> {
    dim: usize,
    value: Arc<ChartValueFn<T>>,
    gradient: Option<Arc<ChartGradientFn<T>>>,
    fd_step: T,
}

impl<T: Real> ChartFunction<T> {
    pub fn new<F>(dim: usize, value: F) -> Self
    where
        F: Fn(&AffineChart, &DVector<T>) -> T + Send + Sync + 'static,
    {
        Self { dim, value: Arc::new(value), gradient: None, fd_step: lit(DEFAULT_FD_STEP) }
    }

    /// Supplies an analytic coordinate gradient instead of central differences.
    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&AffineChart, &DVector<T>) -> DVector<T> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn with_fd_step(mut self, step: T) -> Self {
        self.fd_step = step;
        self
    }

    /// Drops the analytic gradient so the finite-difference path is used.
    pub fn without_gradient(mut self) -> Self {
        self.gradient = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn evaluate(&self, chart: &AffineChart, coords: &DVector<T>) -> Result<T> {
        let v = (self.value)(chart, coords);
        if !v.is_finite() {
            return Err(Error::Evaluation("chart function returned a non-finite value".into()));
        }
        Ok(v)
    }

    pub fn gradient(&self, chart: &AffineChart, coords: &DVector<T>) -> Result<DVector<T>> {
        match &self.gradient {
            Some(g) => {
                let grad = g(chart, coords);
                if grad.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Evaluation("chart gradient is not finite".into()));
                }
                Ok(grad)
            }
            None => finite_difference_gradient(|c| (self.value)(chart, c), coords, self.fd_step),
        }
    }
}

impl<T: Real> fmt::Debug for ChartFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartFunction")
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum ConstraintKind<T: Real> {
    /// Conserved observable `<phi>`.
    Expectation(HermitianOperator<T>),
    ChartFunction(ChartFunction<T>),
}

/// One scalar constraint `Phi(x) = target`.
///
/// A `None` target means "conserve the value at the initial state"; use
/// [`ConstraintSet::pinned_at`] to fix it.
#[derive(Debug, Clone)]
pub struct Constraint<T: Real> {
    kind: ConstraintKind<T>,
    target: Option<T>,
    label: String,
}

impl<T: Real> Constraint<T> {
    /// Observable conserved at whatever value it has initially.
    pub fn conserved(op: HermitianOperator<T>) -> Self {
        Self { kind: ConstraintKind::Expectation(op), target: None, label: "expectation".into() }
    }

    /// Observable pinned at `target`, which must lie in its spectral range.
    pub fn expectation(op: HermitianOperator<T>, target: T) -> Result<Self> {
        let (lo, hi) = op.spectral_range();
        let slack: T = lit(1e-12);
        if !target.is_finite() || target < lo - slack || target > hi + slack {
            return Err(Error::InvalidInput(format!(
                "target {} outside spectral range [{}, {}]",
                to_f64(target),
                to_f64(lo),
                to_f64(hi)
            )));
        }
        Ok(Self { kind: ConstraintKind::Expectation(op), target: Some(target), label: "expectation".into() })
    }

    pub fn chart_function(function: ChartFunction<T>, target: T) -> Self {
        Self { kind: ConstraintKind::ChartFunction(function), target: Some(target), label: "chart".into() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &ConstraintKind<T> {
        &self.kind
    }

    pub fn target(&self) -> Option<T> {
        self.target
    }

    pub fn operator(&self) -> Option<&HermitianOperator<T>> {
        match &self.kind {
            ConstraintKind::Expectation(op) => Some(op),
            ConstraintKind::ChartFunction(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ConstraintKind::Expectation(op) => op.dim(),
            ConstraintKind::ChartFunction(f) => f.dim(),
        }
    }

    /// Magnitude that a nonsingular constraint matrix entry is compared
    /// against.
    pub(crate) fn scale(&self) -> T {
        match &self.kind {
            ConstraintKind::Expectation(op) => {
                let s = op.spectral_norm();
                s * s
            }
            ConstraintKind::ChartFunction(_) => T::one(),
        }
    }

    pub fn value(&self, x: &PureState<T>) -> Result<T> {
        check_dim(self.dim(), x.dim())?;
        match &self.kind {
            ConstraintKind::Expectation(op) => expectation(op, x),
            ConstraintKind::ChartFunction(f) => {
                let chart = AffineChart::gauge(x);
                f.evaluate(&chart, &chart.coords_of(x)?)
            }
        }
    }

    /// `value - target`; errors if no target has been pinned.
    pub fn residual(&self, x: &PureState<T>) -> Result<T> {
        let target =
            self.target.ok_or_else(|| Error::InvalidInput(format!("constraint '{}' has no target", self.label)))?;
        Ok(self.value(x)? - target)
    }

    /// Horizontal vector `a` at `x` with `dPhi(w) = 2 Re <a|w>` for every
    /// tangent `w`. Then `X_Phi = -i a` and `Y_Phi = a / 2`.
    pub fn gradient_representer(&self, x: &PureState<T>) -> Result<DVector<Complex<T>>> {
        check_dim(self.dim(), x.dim())?;
        match &self.kind {
            ConstraintKind::Expectation(op) => centered_action(op, x),
            ConstraintKind::ChartFunction(f) => {
                let chart = AffineChart::gauge(x);
                let coords = chart.coords_of(x)?;
                let frame = chart.frame(&coords)?;
                let grad = f.gradient(&chart, &coords)?;
                // 2 Re<v_a|a> = grad_a with a = sum_b u^b v_b  =>  2 G u = grad
                let u = frame
                    .gram
                    .clone()
                    .lu()
                    .solve(&grad.scale(lit(0.5)))
                    .ok_or_else(|| Error::ChartSingularity("gram matrix is singular".into()))?;
                let local = frame.vector(&u)?;
                // re-express at the caller's representative
                let overlap = frame.state.amplitudes().dotc(x.amplitudes());
                let rot = overlap / Complex::new(crate::scalar::cabs(overlap), T::zero());
                Ok(local.components().map(|z| z * rot))
            }
        }
    }
}

/// Ordered, non-empty list of constraints on a common state dimension.
#[derive(Debug, Clone)]
pub struct ConstraintSet<T: Real> {
    constraints: Vec<Constraint<T>>,
}

impl<T: Real> ConstraintSet<T> {
    pub fn new(constraints: Vec<Constraint<T>>) -> Result<Self> {
        let first =
            constraints.first().ok_or_else(|| Error::InvalidInput("constraint set must not be empty".into()))?;
        let dim = first.dim();
        for c in &constraints {
            check_dim(dim, c.dim())?;
        }
        Ok(Self { constraints })
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.constraints[0].dim()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Constraint<T>> {
        self.constraints.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Constraint<T>> {
        self.constraints.get(i)
    }

    pub fn values(&self, x: &PureState<T>) -> Result<Vec<T>> {
        self.constraints.iter().map(|c| c.value(x)).collect()
    }

    pub fn residuals(&self, x: &PureState<T>) -> Result<Vec<T>> {
        self.constraints.iter().map(|c| c.residual(x)).collect()
    }

    /// Copy with every unset target fixed to its value at `x0`.
    pub fn pinned_at(&self, x0: &PureState<T>) -> Result<Self> {
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                let mut c = c.clone();
                if c.target.is_none() {
                    c.target = Some(c.value(x0)?);
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { constraints })
    }

    pub(crate) fn representers(&self, x: &PureState<T>) -> Result<Vec<DVector<Complex<T>>>> {
        self.constraints.iter().map(|c| c.gradient_representer(x)).collect()
    }

    pub(crate) fn scale(&self) -> T {
        self.constraints.iter().fold(T::zero(), |m, c| m.max(c.scale()))
    }
}

impl<'a, T: Real> IntoIterator for &'a ConstraintSet<T> {
    type Item = &'a Constraint<T>;
    type IntoIter = std::slice::Iter<'a, Constraint<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.constraints.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx() -> HermitianOperator<f64> {
        HermitianOperator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn target_must_be_in_spectrum() {
        assert!(Constraint::expectation(sx(), 0.3).is_ok());
        assert!(Constraint::expectation(sx(), 1.5).is_err());
    }

    #[test]
    fn set_rejects_empty_and_mixed_dims() {
        assert!(ConstraintSet::<f64>::new(vec![]).is_err());
        let big = HermitianOperator::<f64>::identity(3).unwrap();
        let r = ConstraintSet::new(vec![Constraint::conserved(sx()), Constraint::conserved(big)]);
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }

    #[test]
    fn pinning_fixes_initial_values() {
        let x = PureState::from_slice(&[Complex::new(0.8, 0.0), Complex::new(0.6, 0.0)]).unwrap();
        let cs = ConstraintSet::new(vec![Constraint::conserved(sx())]).unwrap();
        assert!(cs.residuals(&x).is_err());
        let pinned = cs.pinned_at(&x).unwrap();
        assert!(pinned.residuals(&x).unwrap()[0].abs() < 1e-15);
        assert!((pinned.get(0).unwrap().target().unwrap() - 0.96).abs() < 1e-12);
    }

    #[test]
    fn chart_function_representer_matches_expectation() {
        // <sigma_x> written as a chart function must give the same representer
        let f = ChartFunction::new(2, |chart: &AffineChart, c: &DVector<f64>| {
            let x: PureState<f64> = chart.embed(c).unwrap();
            expectation(&sx(), &x).unwrap()
        });
        let as_chart = Constraint::chart_function(f, 0.0);
        let as_op = Constraint::conserved(sx());
        let x = PureState::from_slice(&[Complex::new(0.3, 0.2), Complex::new(-0.5, 0.9)]).unwrap();
        let a = as_chart.gradient_representer(&x).unwrap();
        let b = as_op.gradient_representer(&x).unwrap();
        assert!((a - b).norm() < 1e-8);
    }
}
