//! Named, parameterized models in double precision.
//!
//! Each model has a string id, a parameter schema with defaults, named
//! coordinates and a set of engines that can drive it. Coordinates are Bloch
//! angles `(theta, phi)`, one pair per spin.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use super::example1::{example1_field, Example1Params};
use super::example2::{example2_constraint_value, example2_constraints, example2_field, example2_hamiltonian};
use super::separability::{concurrence_surrogate, separability_constraints};
use super::spin::{
    bloch_angles, bloch_state_at, bloch_vector, bloch_vector_rate, bloch_velocity, heisenberg_hamiltonian, pauli,
    product_state, reduced_bloch_rates, reduced_bloch_vectors, Axis, BlochCoords, TwoSphereCoords,
};
use crate::constraint::Flow;
use crate::error::{Error, Result};
use crate::geometry::{HermitianOperator, PureState};
use crate::integrate::{
    find_fixed_points, find_state_fixed_points, integrate, CoordinateDynamics, FixedPointOptions, IntegrationFailure,
    IntegratorOptions, Stability, StateDynamics, Trajectory,
};

/// Refined fixed points closer than this to a pole are dropped: the chart
/// degenerates there and the linearization cannot be taken.
pub const POLE_EXCLUSION: f64 = 1e-4;

/// Polar margin of sampling grids: `theta` spans `[THETA_MARGIN, pi - THETA_MARGIN]`.
pub const THETA_MARGIN: f64 = PI / 36.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Example1Ode,
    Example1Operator,
    Example2Ode,
    Example2Operator,
    FreeSpin,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::Example1Ode,
        ModelId::Example1Operator,
        ModelId::Example2Ode,
        ModelId::Example2Operator,
        ModelId::FreeSpin,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::Example1Ode => "example1-ode",
            ModelId::Example1Operator => "example1-operator",
            ModelId::Example2Ode => "example2-ode",
            ModelId::Example2Operator => "example2-operator",
            ModelId::FreeSpin => "free-spin",
        }
    }

    /// Two-spin models whose grids are drawn on sphere 1 with sphere 2 held
    /// at a partner point.
    pub fn two_spheres(&self) -> bool {
        matches!(self, ModelId::Example1Ode | ModelId::Example1Operator)
    }

    pub fn info(&self) -> ModelInfo {
        let one = ["theta", "phi"];
        let two = ["theta1", "phi1", "theta2", "phi2"];
        let p = |name: &'static str, default: f64, description: &'static str| ParamSpec { name, default, description };
        match self {
            ModelId::Example1Ode => ModelInfo {
                id: *self,
                description:
                    "two spins on the product-state surface, closed-form equations in the frequencies omega1..3",
                coordinates: two.to_vec(),
                params: vec![
                    p("omega1", 1.0, "first angular frequency"),
                    p("omega2", 2.0, "second angular frequency"),
                    p("omega3", 3.0, "third angular frequency"),
                ],
                engines: vec![Engine::ClosedForm],
                constraints: vec!["separability_re", "separability_im"],
                has_energy: false,
            },
            ModelId::Example1Operator => ModelInfo {
                id: *self,
                description: "Heisenberg pair H = -J sum_k s^k s^k - B (s^z 1 + 1 s^z) kept disentangled",
                coordinates: two.to_vec(),
                params: vec![p("J", 1.0, "spin-spin coupling"), p("B", 0.5, "external field")],
                engines: vec![Engine::Symplectic, Engine::Metric],
                constraints: vec!["separability_re", "separability_im"],
                has_energy: true,
            },
            ModelId::Example2Ode => ModelInfo {
                id: *self,
                description: "single spin, H = s^z, <s^x> conserved, closed-form equations",
                coordinates: one.to_vec(),
                params: vec![],
                engines: vec![Engine::ClosedForm],
                constraints: vec!["sigma_x"],
                has_energy: true,
            },
            ModelId::Example2Operator => ModelInfo {
                id: *self,
                description: "single spin, H = s^z, <s^x> conserved by the generic engine",
                coordinates: one.to_vec(),
                params: vec![],
                engines: vec![Engine::Metric, Engine::Symplectic],
                constraints: vec!["sigma_x"],
                has_energy: true,
            },
            ModelId::FreeSpin => ModelInfo {
                id: *self,
                description: "single spin precessing under H = b s^z",
                coordinates: one.to_vec(),
                params: vec![p("b", 1.0, "field strength")],
                engines: vec![Engine::Unconstrained, Engine::ClosedForm],
                constraints: vec![],
                has_energy: true,
            },
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Symplectic,
    Metric,
    ClosedForm,
    Unconstrained,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::Symplectic => "symplectic",
            Engine::Metric => "metric",
            Engine::ClosedForm => "closed-form",
            Engine::Unconstrained => "unconstrained",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symplectic" => Ok(Engine::Symplectic),
            "metric" => Ok(Engine::Metric),
            "closed-form" => Ok(Engine::ClosedForm),
            "unconstrained" => Ok(Engine::Unconstrained),
            _ => Err(Error::InvalidInput(format!(
                "unknown engine '{s}' (expected symplectic, metric, closed-form or unconstrained)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub description: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelInfo {
    pub id: ModelId,
    pub description: &'static str,
    pub coordinates: Vec<&'static str>,
    pub params: Vec<ParamSpec>,
    /// Supported engines; the first is the default.
    pub engines: Vec<Engine>,
    pub constraints: Vec<&'static str>,
    pub has_energy: bool,
}

impl ModelInfo {
    pub fn coord_dim(&self) -> usize {
        self.coordinates.len()
    }

    pub fn default_engine(&self) -> Engine {
        self.engines[0]
    }
}

/// Sampling grid on one sphere, theta-major.
///
/// `theta_k = THETA_MARGIN + k * d` with `d = (pi/2 - THETA_MARGIN) /
/// floor(n/2)`, so the equator is row `floor(n/2)` and odd counts end at
/// `pi - THETA_MARGIN`; `phi_j = 2 pi j / m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub theta_count: usize,
    pub phi_count: usize,
}

impl GridSpec {
    pub fn new(theta_count: usize, phi_count: usize) -> Result<Self> {
        if theta_count == 0 || phi_count == 0 {
            return Err(Error::InvalidInput("grid counts must be positive".into()));
        }
        Ok(Self { theta_count, phi_count })
    }

    pub fn thetas(&self) -> Vec<f64> {
        let half = self.theta_count / 2;
        if half == 0 {
            return vec![PI / 2.0];
        }
        let d = (PI / 2.0 - THETA_MARGIN) / half as f64;
        (0..self.theta_count).map(|k| if k == half { PI / 2.0 } else { THETA_MARGIN + k as f64 * d }).collect()
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.phi_count).map(|j| TAU * j as f64 / self.phi_count as f64).collect()
    }

    /// All `(theta, phi)` nodes, theta-major.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let phis = self.phis();
        self.thetas().into_iter().flat_map(|t| phis.iter().map(move |p| (t, *p))).collect()
    }

    pub fn len(&self) -> usize {
        self.theta_count * self.phi_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Validated parameter values, including defaults for unset names.
#[derive(Debug, Clone, PartialEq)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Example1Ode(Example1Params<f64>),
    Example2Ode,
    FreeSpinClosedForm {
        b: f64,
    },
    /// Generic engine on state vectors.
    Operator(Flow<f64>),
}

/// A model with its parameters and engine fixed.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    info: ModelInfo,
    params: Params,
    engine: Engine,
    backend: Backend,
}

/// Initial condition of a run.
#[derive(Debug, Clone)]
pub enum Initial {
    Coords(Vec<f64>),
    State(PureState<f64>),
}

/// A trajectory expressed in model coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub model: ModelId,
    pub engine: Engine,
    pub coordinate_names: Vec<String>,
    pub constraint_labels: Vec<String>,
    pub times: Vec<f64>,
    pub coords: Vec<Vec<f64>>,
    pub constraint_values: Vec<Vec<f64>>,
    pub energy: Option<Vec<f64>>,
    pub drift: Vec<f64>,
    pub energy_drift: Option<f64>,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone)]
pub struct SimulationFailure {
    pub error: Error,
    /// Present when integration had started.
    pub partial: Option<SimulationOutput>,
}

impl fmt::Display for SimulationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for SimulationFailure {}

impl From<Error> for SimulationFailure {
    fn from(error: Error) -> Self {
        Self { error, partial: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordFixedPoint {
    pub coords: Vec<f64>,
    pub residual: f64,
    pub stability: Stability,
    pub eigenvalue_real_parts: Vec<f64>,
}

impl ModelInstance {
    /// Unset parameters take their defaults; `engine` defaults to the
    /// model's first engine.
    pub fn new(id: ModelId, params: &BTreeMap<String, f64>, engine: Option<Engine>) -> Result<Self> {
        let info = id.info();
        for (k, v) in params {
            if !info.params.iter().any(|p| p.name == k) {
                let known: Vec<_> = info.params.iter().map(|p| p.name).collect();
                return Err(Error::InvalidInput(format!(
                    "model {id} has no parameter '{k}' (known: {})",
                    if known.is_empty() { "none".to_string() } else { known.join(", ") }
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("parameter '{k}' must be finite")));
            }
        }
        let values: BTreeMap<String, f64> = info
            .params
            .iter()
            .map(|p| (p.name.to_string(), params.get(p.name).copied().unwrap_or(p.default)))
            .collect();
        let params = Params(values);
        let engine = engine.unwrap_or(info.default_engine());
        if !info.engines.contains(&engine) {
            let names: Vec<_> = info.engines.iter().map(Engine::as_str).collect();
            return Err(Error::InvalidInput(format!(
                "engine {engine} is not available for {id} (available: {})",
                names.join(", ")
            )));
        }
        let backend = match (id, engine) {
            (ModelId::Example1Ode, _) => Backend::Example1Ode(Example1Params::new(
                params.get("omega1"),
                params.get("omega2"),
                params.get("omega3"),
            )?),
            (ModelId::Example1Operator, e) => {
                let h = heisenberg_hamiltonian(params.get("J"), params.get("B"));
                Backend::Operator(constrained_flow(e, separability_constraints(), h)?)
            }
            (ModelId::Example2Ode, _) => Backend::Example2Ode,
            (ModelId::Example2Operator, e) => {
                Backend::Operator(constrained_flow(e, example2_constraints(), example2_hamiltonian())?)
            }
            (ModelId::FreeSpin, Engine::ClosedForm) => Backend::FreeSpinClosedForm { b: params.get("b") },
            (ModelId::FreeSpin, _) => Backend::Operator(Flow::Free { hamiltonian: free_hamiltonian(params.get("b")) }),
        };
        Ok(Self { info, params, engine, backend })
    }

    pub fn from_names(model: &str, params: &BTreeMap<String, f64>, engine: Option<&str>) -> Result<Self> {
        let id: ModelId = model.parse()?;
        let engine = engine.map(str::parse).transpose()?;
        Self::new(id, params, engine)
    }

    pub fn id(&self) -> ModelId {
        self.info.id
    }

    pub fn info(&self) -> &ModelInfo {
        &self.info
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn hamiltonian(&self) -> Option<HermitianOperator<f64>> {
        match (&self.backend, self.id()) {
            (Backend::Operator(flow), _) => Some(flow.hamiltonian().clone()),
            (_, ModelId::Example2Ode) => Some(example2_hamiltonian()),
            (Backend::FreeSpinClosedForm { b }, _) => Some(free_hamiltonian(*b)),
            _ => None,
        }
    }

    fn check_coords(&self, coords: &[f64]) -> Result<()> {
        let n = self.info.coord_dim();
        if coords.len() != n {
            return Err(Error::InvalidCoordinates(format!(
                "{} expects {n} coordinates ({}), got {}",
                self.id(),
                self.info.coordinates.join(", "),
                coords.len()
            )));
        }
        for pair in coords.chunks(2) {
            BlochCoords::new(pair[0], pair[1])?;
        }
        Ok(())
    }

    /// State represented by chart coordinates.
    pub fn state_at(&self, coords: &[f64]) -> Result<PureState<f64>> {
        self.check_coords(coords)?;
        Ok(match coords.len() {
            2 => bloch_state_at(coords[0], coords[1]),
            _ => product_state(&TwoSphereCoords::new(coords[0], coords[1], coords[2], coords[3])?),
        })
    }

    /// Chart coordinates of a state (reduced Bloch angles for two spins),
    /// with `phi` in `(-pi, pi]`.
    pub fn coords_of_state(&self, x: &PureState<f64>) -> Result<Vec<f64>> {
        match self.info.coord_dim() {
            2 => {
                let (t, p) = bloch_angles(bloch_vector(x)?);
                Ok(vec![t, p])
            }
            _ => {
                let (a, b) = reduced_bloch_vectors(x)?;
                let (t1, p1) = bloch_angles(a);
                let (t2, p2) = bloch_angles(b);
                Ok(vec![t1, p1, t2, p2])
            }
        }
    }

    /// Coordinate velocity at `coords`.
    pub fn field(&self, coords: &[f64]) -> Result<Vec<f64>> {
        self.check_coords(coords)?;
        match &self.backend {
            Backend::Example1Ode(p) => {
                let c = TwoSphereCoords::new(coords[0], coords[1], coords[2], coords[3])?;
                Ok(example1_field(&c, p)?.to_coordinate_order().to_vec())
            }
            Backend::Example2Ode => {
                let (a, b) = example2_field(&BlochCoords::new(coords[0], coords[1])?)?;
                Ok(vec![a, b])
            }
            Backend::FreeSpinClosedForm { b } => Ok(vec![0.0, 2.0 * b]),
            Backend::Operator(flow) => {
                let x = self.state_at(coords)?;
                let v = flow.velocity(&x)?.vector;
                if coords.len() == 2 {
                    let (a, b) = bloch_velocity(bloch_vector(&x)?, bloch_vector_rate(&v)?)?;
                    Ok(vec![a, b])
                } else {
                    let (r1, r2) = reduced_bloch_vectors(&x)?;
                    let (d1, d2) = reduced_bloch_rates(&v)?;
                    let (t1, p1) = bloch_velocity(r1, d1)?;
                    let (t2, p2) = bloch_velocity(r2, d2)?;
                    Ok(vec![t1, p1, t2, p2])
                }
            }
        }
    }

    /// `(theta_dot, phi_dot)` on sphere 1. Two-spin models need the partner
    /// point `(theta2, phi2)`; one-spin models reject it.
    pub fn sphere_field(&self, theta: f64, phi: f64, partner: Option<(f64, f64)>) -> Result<(f64, f64)> {
        let v = match (self.id().two_spheres(), partner) {
            (true, Some((t2, p2))) => self.field(&[theta, phi, t2, p2])?,
            (true, None) => {
                return Err(Error::InvalidInput(format!("{} needs partner coordinates (theta2, phi2)", self.id())))
            }
            (false, None) => self.field(&[theta, phi])?,
            (false, Some(_)) => return Err(Error::InvalidInput(format!("{} takes no partner coordinates", self.id()))),
        };
        Ok((v[0], v[1]))
    }

    pub fn check_partner(&self, partner: Option<(f64, f64)>) -> Result<()> {
        match (self.id().two_spheres(), partner) {
            (true, Some((t, p))) => BlochCoords::new(t, p).map(|_| ()),
            (true, None) => Err(Error::InvalidInput(format!("{} needs partner coordinates", self.id()))),
            (false, Some(_)) => Err(Error::InvalidInput(format!("{} takes no partner coordinates", self.id()))),
            (false, None) => Ok(()),
        }
    }

    fn coordinate_dynamics(&self) -> CoordinateDynamics<f64> {
        let me = self.clone();
        let n = self.info.coord_dim();
        let dynamics =
            CoordinateDynamics::new(n, move |y: &DVector<f64>| Ok(DVector::from_vec(me.field(y.as_slice())?)));
        match self.id() {
            ModelId::Example1Ode => dynamics
                .with_monitor("separability_re", |y: &DVector<f64>| Ok(product_surrogate(y)?.0))
                .with_monitor("separability_im", |y: &DVector<f64>| Ok(product_surrogate(y)?.1)),
            ModelId::Example2Ode => dynamics
                .with_monitor("sigma_x", |y: &DVector<f64>| Ok(example2_constraint_value(&raw_bloch(y))))
                .with_energy(|y: &DVector<f64>| Ok(y[0].cos())),
            _ => dynamics.with_energy({
                let b = self.params.as_map().get("b").copied().unwrap_or(1.0);
                move |y: &DVector<f64>| Ok(b * y[0].cos())
            }),
        }
    }

    /// Integrate from `initial` over `[0, opts.t_end]`.
    ///
    /// Closed-form models integrate in coordinates, which must stay off the
    /// poles. Operator models integrate state vectors and report reduced
    /// Bloch angles with `phi` unwrapped to be continuous.
    pub fn simulate(
        &self,
        initial: &Initial,
        opts: &IntegratorOptions<f64>,
    ) -> std::result::Result<SimulationOutput, SimulationFailure> {
        match &self.backend {
            Backend::Operator(flow) => {
                let x0 = match initial {
                    Initial::Coords(c) => self.state_at(c)?,
                    Initial::State(x) => {
                        if x.dim() != flow.dim() {
                            return Err(Error::Dimension { expected: flow.dim(), found: x.dim() }.into());
                        }
                        x.clone()
                    }
                };
                let dynamics = StateDynamics::new(flow.clone(), &x0)?;
                let y0 = StateDynamics::vector_of(&x0);
                let run = integrate(&dynamics, &y0, opts);
                self.finish(
                    run,
                    |y| {
                        let x = StateDynamics::state_of(y)?;
                        self.coords_of_state(&x)
                    },
                    true,
                )
            }
            _ => {
                let c0 = match initial {
                    Initial::Coords(c) => c.clone(),
                    Initial::State(x) => self.coords_of_state(x)?,
                };
                self.check_coords(&c0)?;
                let dynamics = self.coordinate_dynamics();
                let run = integrate(&dynamics, &DVector::from_vec(c0), opts);
                self.finish(run, |y| Ok(y.as_slice().to_vec()), false)
            }
        }
    }

    fn finish<F>(
        &self,
        run: std::result::Result<Trajectory<f64>, IntegrationFailure<f64>>,
        to_coords: F,
        unwrap: bool,
    ) -> std::result::Result<SimulationOutput, SimulationFailure>
    where
        F: Fn(&DVector<f64>) -> Result<Vec<f64>>,
    {
        let convert = |t: Trajectory<f64>| -> Result<SimulationOutput> {
            let mut coords: Vec<Vec<f64>> = t.points.iter().map(&to_coords).collect::<Result<_>>()?;
            if unwrap {
                unwrap_phases(&mut coords);
            }
            Ok(SimulationOutput {
                model: self.id(),
                engine: self.engine,
                coordinate_names: self.info.coordinates.iter().map(|s| s.to_string()).collect(),
                constraint_labels: t.constraint_labels.clone(),
                energy_drift: t.energy_drift(),
                times: t.times,
                coords,
                constraint_values: t.constraint_values,
                energy: t.energy_series,
                drift: t.drift,
                rejected_steps: t.rejected_steps,
            })
        };
        match run {
            Ok(t) => Ok(convert(t)?),
            Err(f) => {
                let partial = if f.partial.is_empty() { None } else { convert(f.partial).ok() };
                Err(SimulationFailure { error: f.error, partial })
            }
        }
    }

    /// Fixed points seeded from a grid.
    ///
    /// One-spin models are searched on the `(theta, phi)` grid; two-spin
    /// models on the product of the grid with itself. Free precession has no
    /// fixed points inside the chart, so its search runs on state vectors
    /// and reports the poles.
    pub fn fixed_points(&self, grid: GridSpec, residual_tol: f64, refine: bool) -> Result<Vec<CoordFixedPoint>> {
        if !(residual_tol > 0.0) {
            return Err(Error::InvalidInput("residual tolerance must be positive".into()));
        }
        let nodes = grid.nodes();
        if self.id() == ModelId::FreeSpin {
            let flow = Flow::Free { hamiltonian: free_hamiltonian(self.params.get("b")) };
            let seeds: Vec<_> = nodes.iter().map(|(t, p)| bloch_state_at(*t, *p)).collect();
            let mut opts = FixedPointOptions::new(residual_tol);
            opts.refine = refine;
            let found = find_state_fixed_points(&|x: &PureState<f64>| Ok(flow.velocity(x)?.vector), &seeds, &opts)?;
            return found
                .into_iter()
                .map(|f| {
                    let (t, p) = bloch_angles(bloch_vector(&f.state)?);
                    // The azimuth of a pole is meaningless; report 0.
                    let p = if t.sin().abs() < 1e-6 { 0.0 } else { p };
                    Ok(CoordFixedPoint {
                        coords: vec![t, p],
                        residual: f.residual,
                        stability: f.stability,
                        eigenvalue_real_parts: f.eigenvalue_real_parts,
                    })
                })
                .collect();
        }
        let seeds: Vec<DVector<f64>> = if self.id().two_spheres() {
            nodes.iter().flat_map(|a| nodes.iter().map(move |b| DVector::from_vec(vec![a.0, a.1, b.0, b.1]))).collect()
        } else {
            nodes.iter().map(|(t, p)| DVector::from_vec(vec![*t, *p])).collect()
        };
        let pairs = self.info.coord_dim() / 2;
        let mut opts = FixedPointOptions::new(residual_tol)
            .with_periods((0..pairs).flat_map(|_| [None, Some(TAU)]).collect())
            .with_bounds((0..pairs).flat_map(|_| [Some((POLE_EXCLUSION, PI - POLE_EXCLUSION)), None]).collect());
        opts.refine = refine;
        let field = |y: &DVector<f64>| -> Result<DVector<f64>> { Ok(DVector::from_vec(self.field(y.as_slice())?)) };
        let found = find_fixed_points(&field, &seeds, &opts)?;
        Ok(found
            .into_iter()
            .map(|f| CoordFixedPoint {
                coords: f.point.as_slice().to_vec(),
                residual: f.residual,
                stability: f.stability,
                eigenvalue_real_parts: f.eigenvalue_real_parts,
            })
            .collect())
    }
}

fn constrained_flow(
    engine: Engine,
    cs: crate::constraint::ConstraintSet<f64>,
    h: HermitianOperator<f64>,
) -> Result<Flow<f64>> {
    match engine {
        Engine::Symplectic => Flow::symplectic(cs, h),
        Engine::Metric => Flow::metric(cs, h),
        Engine::Unconstrained => Ok(Flow::Free { hamiltonian: h }),
        Engine::ClosedForm => Err(Error::InvalidInput("no closed form for operator models".into())),
    }
}

fn free_hamiltonian(b: f64) -> HermitianOperator<f64> {
    &pauli::<f64>(Axis::Z) * b
}

/// Bloch angles without range checks, for monitors evaluated on raw
/// integrator states.
fn raw_bloch(y: &DVector<f64>) -> BlochCoords<f64> {
    BlochCoords { theta: y[0], phi: y[1] }
}

fn product_surrogate(y: &DVector<f64>) -> Result<(f64, f64)> {
    let a = bloch_state_at(y[0], y[1]);
    let b = bloch_state_at(y[2], y[3]);
    let x = PureState::new(a.amplitudes().kronecker(b.amplitudes()))?;
    let z = concurrence_surrogate(&x)?;
    Ok((z.re, z.im))
}

/// Make every odd-index column (the azimuths) continuous in time.
fn unwrap_phases(rows: &mut [Vec<f64>]) {
    for i in 1..rows.len() {
        let (done, rest) = rows.split_at_mut(i);
        let prev = &done[i - 1];
        let cur = &mut rest[0];
        for k in (1..cur.len()).step_by(2) {
            let mut d = (cur[k] - prev[k]) % TAU;
            if d > PI {
                d -= TAU;
            } else if d <= -PI {
                d += TAU;
            }
            cur[k] = prev[k] + d;
        }
    }
}

/// All registered models.
pub fn models() -> Vec<ModelInfo> {
    ModelId::ALL.iter().map(ModelId::info).collect()
}
