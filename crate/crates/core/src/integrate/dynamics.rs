use std::sync::Arc;

use nalgebra::DVector;

use crate::constraint::{ConstraintSet, Flow};
use crate::error::{check_dim, Result};
use crate::geometry::{expectation, flatten, unflatten, PureState};
use crate::scalar::Real;

/// Velocity at a point plus the condition estimate of any constraint
/// matrix solved to produce it (1 when none was).
#[derive(Debug, Clone)]
pub struct FieldValue<T: Real> {
    pub velocity: DVector<T>,
    pub condition: T,
}

impl<T: Real> FieldValue<T> {
    pub fn plain(velocity: DVector<T>) -> Self {
        Self { velocity, condition: T::one() }
    }
}

/// An autonomous first-order system on a real vector space.
pub trait Dynamics<T: Real> {
    fn dim(&self) -> usize;

    fn velocity(&self, y: &DVector<T>) -> Result<FieldValue<T>>;

    /// Monitored quantities whose change along the flow counts as drift.
    fn monitored(&self, _y: &DVector<T>) -> Result<Vec<T>> {
        Ok(Vec::new())
    }

    fn monitored_labels(&self) -> Vec<String> {
        Vec::new()
    }

    fn energy(&self, _y: &DVector<T>) -> Result<Option<T>> {
        Ok(None)
    }

    /// Pull `y` back onto the manifold after an accepted step.
    fn renormalize(&self, _y: &mut DVector<T>) {}
}

type VecFn<T> = dyn Fn(&DVector<T>) -> Result<DVector<T>> + Send + Sync;
type ScalarFn<T> = dyn Fn(&DVector<T>) -> Result<T> + Send + Sync;

/// Dynamics given by closures on a coordinate vector.
#[derive(Clone)]
pub struct CoordinateDynamics<T: Real> {
    dim: usize,
    field: Arc<VecFn<T>>,
    monitors: Vec<(String, Arc<ScalarFn<T>>)>,
    energy: Option<Arc<ScalarFn<T>>>,
}

impl<T: Real> CoordinateDynamics<T> {
    pub fn new<F>(dim: usize, field: F) -> Self
    where
        F: Fn(&DVector<T>) -> Result<DVector<T>> + Send + Sync + 'static,
    {
        Self { dim, field: Arc::new(field), monitors: Vec::new(), energy: None }
    }

    pub fn with_monitor<F>(mut self, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&DVector<T>) -> Result<T> + Send + Sync + 'static,
    {
        self.monitors.push((label.into(), Arc::new(f)));
        self
    }

    pub fn with_energy<F>(mut self, f: F) -> Self
    where
        F: Fn(&DVector<T>) -> Result<T> + Send + Sync + 'static,
    {
        self.energy = Some(Arc::new(f));
        self
    }
}

impl<T: Real> std::fmt::Debug for CoordinateDynamics<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoordinateDynamics")
            .field("dim", &self.dim)
            .field("monitors", &self.monitored_labels())
            .field("energy", &self.energy.is_some())
            .finish()
    }
}

impl<T: Real> Dynamics<T> for CoordinateDynamics<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn velocity(&self, y: &DVector<T>) -> Result<FieldValue<T>> {
        check_dim(self.dim, y.len())?;
        let v = (self.field)(y)?;
        check_dim(self.dim, v.len())?;
        Ok(FieldValue::plain(v))
    }

    fn monitored(&self, y: &DVector<T>) -> Result<Vec<T>> {
        self.monitors.iter().map(|(_, f)| f(y)).collect()
    }

    fn monitored_labels(&self) -> Vec<String> {
        self.monitors.iter().map(|(l, _)| l.clone()).collect()
    }

    fn energy(&self, y: &DVector<T>) -> Result<Option<T>> {
        self.energy.as_ref().map(|f| f(y)).transpose()
    }
}

/// A [`Flow`] acting on state vectors flattened as `(re, im)` pairs.
///
/// The field is extended off the unit sphere by homogeneity, so an
/// unnormalized `y` moves like `|y|` times its normalized direction.
#[derive(Debug, Clone)]
pub struct StateDynamics<T: Real> {
    flow: Flow<T>,
}

impl<T: Real> StateDynamics<T> {
    /// Constraints without a target are pinned at `x0` so drift is measured
    /// against the initial value.
    pub fn new(flow: Flow<T>, x0: &PureState<T>) -> Result<Self> {
        check_dim(flow.dim(), x0.dim())?;
        let flow = match flow {
            Flow::Symplectic { constraints, hamiltonian } => {
                Flow::Symplectic { constraints: constraints.pinned_at(x0)?, hamiltonian }
            }
            Flow::Metric { constraints, hamiltonian } => {
                Flow::Metric { constraints: constraints.pinned_at(x0)?, hamiltonian }
            }
            free => free,
        };
        Ok(Self { flow })
    }

    pub fn flow(&self) -> &Flow<T> {
        &self.flow
    }

    pub fn constraints(&self) -> Option<&ConstraintSet<T>> {
        self.flow.constraints()
    }

    pub fn state_of(y: &DVector<T>) -> Result<PureState<T>> {
        PureState::new(unflatten(y))
    }

    pub fn vector_of(x: &PureState<T>) -> DVector<T> {
        flatten(x.amplitudes())
    }
}

impl<T: Real> Dynamics<T> for StateDynamics<T> {
    fn dim(&self) -> usize {
        2 * self.flow.dim()
    }

    fn velocity(&self, y: &DVector<T>) -> Result<FieldValue<T>> {
        check_dim(self.dim(), y.len())?;
        let x = Self::state_of(y)?;
        let fv = self.flow.velocity(&x)?;
        let scale = y.norm();
        Ok(FieldValue { velocity: flatten(fv.vector.components()) * scale, condition: fv.condition })
    }

    fn monitored(&self, y: &DVector<T>) -> Result<Vec<T>> {
        match self.flow.constraints() {
            Some(cs) => cs.values(&Self::state_of(y)?),
            None => Ok(Vec::new()),
        }
    }

    fn monitored_labels(&self) -> Vec<String> {
        self.flow.constraints().map(|cs| cs.iter().map(|c| c.label().to_string()).collect()).unwrap_or_default()
    }

    fn energy(&self, y: &DVector<T>) -> Result<Option<T>> {
        Ok(Some(expectation(self.flow.hamiltonian(), &Self::state_of(y)?)?))
    }

    fn renormalize(&self, y: &mut DVector<T>) {
        let n = y.norm();
        if n > T::zero() {
            *y /= n;
        }
    }
}

/// The same system run backwards in time.
#[derive(Debug, Clone)]
pub struct Reversed<D>(pub D);

impl<T: Real, D: Dynamics<T>> Dynamics<T> for Reversed<D> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn velocity(&self, y: &DVector<T>) -> Result<FieldValue<T>> {
        let mut fv = self.0.velocity(y)?;
        fv.velocity = -fv.velocity;
        Ok(fv)
    }

    fn monitored(&self, y: &DVector<T>) -> Result<Vec<T>> {
        self.0.monitored(y)
    }

    fn monitored_labels(&self) -> Vec<String> {
        self.0.monitored_labels()
    }

    fn energy(&self, y: &DVector<T>) -> Result<Option<T>> {
        self.0.energy(y)
    }

    fn renormalize(&self, y: &mut DVector<T>) {
        self.0.renormalize(y)
    }
}

impl<T: Real, D: Dynamics<T> + ?Sized> Dynamics<T> for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn velocity(&self, y: &DVector<T>) -> Result<FieldValue<T>> {
        (**self).velocity(y)
    }

    fn monitored(&self, y: &DVector<T>) -> Result<Vec<T>> {
        (**self).monitored(y)
    }

    fn monitored_labels(&self) -> Vec<String> {
        (**self).monitored_labels()
    }

    fn energy(&self, y: &DVector<T>) -> Result<Option<T>> {
        (**self).energy(y)
    }

    fn renormalize(&self, y: &mut DVector<T>) {
        (**self).renormalize(y)
    }
}
