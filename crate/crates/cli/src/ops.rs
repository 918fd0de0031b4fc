//! Operations shared by the command line and the HTTP service.

use qconstrain::integrate::IntegratorOptions;
use qconstrain::models::registry::{models, CoordFixedPoint, GridSpec, ModelInfo, ModelInstance, SimulationOutput};
use qconstrain::{Error, Result};
use rayon::prelude::*;

use crate::config::ValidRun;
use crate::docs::*;

pub const DEFAULT_FIELD_GRID: usize = 24;
pub const DEFAULT_FIXED_POINT_GRID: usize = 50;
/// Per-sphere grid for two-spin fixed-point searches, whose seeds are the
/// product of the grid with itself.
pub const DEFAULT_TWO_SPHERE_GRID: usize = 6;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;

/// A run that either completed or stopped early with whatever it had.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub doc: TrajectoryDoc,
    pub error: Option<Error>,
}

pub fn simulate(run: &ValidRun) -> std::result::Result<SimulationResult, Error> {
    match run.instance.simulate(&run.initial, &run.options) {
        Ok(out) => Ok(SimulationResult { doc: trajectory_doc(&run.instance, &run.options, out, None), error: None }),
        Err(f) => match f.partial {
            Some(p) => Ok(SimulationResult {
                doc: trajectory_doc(&run.instance, &run.options, p, Some(&f.error)),
                error: Some(f.error),
            }),
            None => Err(f.error),
        },
    }
}

pub fn trajectory_doc(
    instance: &ModelInstance,
    options: &IntegratorOptions<f64>,
    out: SimulationOutput,
    error: Option<&Error>,
) -> TrajectoryDoc {
    let mut columns = vec!["t".to_string()];
    columns.extend(out.coordinate_names.iter().cloned());
    columns.extend(out.constraint_labels.iter().cloned());
    if out.energy.is_some() {
        columns.push("energy".into());
    }
    TrajectoryDoc {
        schema_version: SCHEMA_VERSION,
        status: if error.is_some() { Status::Partial } else { Status::Complete },
        error: error.map(ErrorBody::from),
        model: out.model.to_string(),
        engine: out.engine.to_string(),
        params: instance.params().as_map().clone(),
        integrator: options.into(),
        columns,
        coordinate_names: out.coordinate_names,
        constraint_labels: out.constraint_labels,
        drift: DriftSummary {
            max_constraint_drift: out.drift.iter().fold(0.0, |m: f64, d| m.max(*d)),
            max_energy_drift: out.energy_drift,
            per_sample: out.drift,
        },
        times: out.times,
        coords: out.coords,
        constraint_values: out.constraint_values,
        energy: out.energy,
        rejected_steps: out.rejected_steps,
    }
}

pub fn grid_doc(grid: &GridSpec) -> GridDoc {
    GridDoc {
        theta_count: grid.theta_count,
        phi_count: grid.phi_count,
        thetas: grid.thetas(),
        phis: grid.phis(),
        order: "theta-major".into(),
        convention: GRID_CONVENTION.into(),
    }
}

/// Sample the sphere-1 velocity on `grid`, in parallel. Nodes where the
/// field cannot be evaluated go to `singular_mask` instead of `samples`.
pub fn field_grid(instance: &ModelInstance, grid: &GridSpec, partner: Option<Partner>) -> Result<FieldGridDoc> {
    let pair = partner.map(|p| (p.theta, p.phi));
    instance.check_partner(pair)?;
    let thetas = grid.thetas();
    let phis = grid.phis();
    let m = grid.phi_count;
    let evaluated: Vec<std::result::Result<FieldSample, MaskedNode>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / m, k % m);
            let (theta, phi) = (thetas[i], phis[j]);
            match instance.sphere_field(theta, phi, pair) {
                Ok((theta_dot, phi_dot)) if theta_dot.is_finite() && phi_dot.is_finite() => {
                    Ok(FieldSample { theta, phi, theta_dot, phi_dot })
                }
                Ok(_) => Err(MaskedNode { theta_index: i, phi_index: j, theta, phi, code: "NonFinite".into() }),
                Err(e) => Err(MaskedNode { theta_index: i, phi_index: j, theta, phi, code: e.code().into() }),
            }
        })
        .collect();
    let mut samples = Vec::with_capacity(evaluated.len());
    let mut singular_mask = Vec::new();
    for r in evaluated {
        match r {
            Ok(s) => samples.push(s),
            Err(n) => singular_mask.push(n),
        }
    }
    Ok(FieldGridDoc {
        schema_version: SCHEMA_VERSION,
        model: instance.id().to_string(),
        engine: instance.engine().to_string(),
        params: instance.params().as_map().clone(),
        partner,
        grid: grid_doc(grid),
        samples,
        singular_mask,
    })
}

pub fn default_fixed_point_grid(instance: &ModelInstance) -> GridSpec {
    let n = if instance.id().two_spheres() { DEFAULT_TWO_SPHERE_GRID } else { DEFAULT_FIXED_POINT_GRID };
    GridSpec::new(n, n).expect("default grid is valid")
}

pub fn fixed_points(
    instance: &ModelInstance,
    grid: &GridSpec,
    residual_tol: f64,
    refine: bool,
) -> Result<FixedPointsDoc> {
    let found = instance.fixed_points(*grid, residual_tol, refine)?;
    let theta_stationary =
        if instance.id().two_spheres() { Some(theta_stationary(instance, grid, residual_tol)) } else { None };
    Ok(FixedPointsDoc {
        schema_version: SCHEMA_VERSION,
        model: instance.id().to_string(),
        engine: instance.engine().to_string(),
        params: instance.params().as_map().clone(),
        residual_tol,
        refined: refine,
        grid: grid_doc(grid),
        coordinate_names: instance.info().coordinates.iter().map(|s| s.to_string()).collect(),
        points: found.into_iter().map(fixed_point_doc).collect(),
        theta_stationary,
    })
}

fn fixed_point_doc(f: CoordFixedPoint) -> FixedPointDoc {
    FixedPointDoc {
        coords: f.coords,
        residual: f.residual,
        stability: f.stability.as_str().into(),
        eigenvalue_real_parts: f.eigenvalue_real_parts,
    }
}

fn theta_stationary(instance: &ModelInstance, grid: &GridSpec, tol: f64) -> Vec<StationaryNode> {
    let nodes = grid.nodes();
    let n = nodes.len();
    (0..n * n)
        .into_par_iter()
        .filter_map(|k| {
            let (a, b) = (nodes[k / n], nodes[k % n]);
            let coords = vec![a.0, a.1, b.0, b.1];
            let v = instance.field(&coords).ok()?;
            let theta_dot = vec![v[0], v[2]];
            (theta_dot.iter().all(|d| d.abs() <= tol)).then_some(StationaryNode { coords, theta_dot })
        })
        .collect()
}

pub fn model_doc(info: &ModelInfo) -> ModelDoc {
    ModelDoc {
        id: info.id.to_string(),
        description: info.description.into(),
        coordinates: info.coordinates.iter().map(|s| s.to_string()).collect(),
        params: info
            .params
            .iter()
            .map(|p| ParamDoc { name: p.name.into(), default: p.default, description: p.description.into() })
            .collect(),
        engines: info.engines.iter().map(|e| e.to_string()).collect(),
        default_engine: info.default_engine().to_string(),
        constraints: info.constraints.iter().map(|s| s.to_string()).collect(),
        has_energy: info.has_energy,
        needs_partner: info.id.two_spheres(),
    }
}

pub fn models_doc() -> ModelsDoc {
    ModelsDoc { schema_version: SCHEMA_VERSION, models: models().iter().map(model_doc).collect() }
}

/// Parse `NxM`.
pub fn parse_grid(s: &str) -> Result<GridSpec> {
    let (a, b) =
        s.split_once(['x', 'X']).ok_or_else(|| Error::InvalidInput(format!("grid '{s}' is not of the form NxM")))?;
    let parse = |t: &str| {
        t.trim().parse::<usize>().map_err(|_| Error::InvalidInput(format!("grid '{s}' is not of the form NxM")))
    };
    GridSpec::new(parse(a)?, parse(b)?)
}

/// Computational failures exit with 3; everything rejected before any
/// integration step exits with 2.
pub fn is_computational(e: &Error) -> bool {
    matches!(
        e,
        Error::DriftAbort { .. }
            | Error::StepLimit { .. }
            | Error::Field { .. }
            | Error::ProjectionFailure { .. }
            | Error::Evaluation(_)
    )
}
