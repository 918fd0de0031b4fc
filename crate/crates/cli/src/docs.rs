//! JSON documents produced by the command line and the HTTP service.
//!
//! Every top-level document carries `"schema_version": 1`. Floats are
//! written with the shortest representation that parses back to the same
//! bits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use qconstrain::integrate::{IntegratorOptions, Method};
use qconstrain::Error;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub const GRID_CONVENTION: &str = "theta_k = pi/36 + k*d with d = (pi/2 - pi/36)/floor(theta_count/2) and \
theta_k = pi/2 exactly at k = floor(theta_count/2); odd counts span [pi/36, pi - pi/36], even counts stop one \
spacing short of the upper end; phi_j = 2*pi*j/phi_count; nodes are theta-major (phi varies fastest)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl From<&Error> for ErrorBody {
    fn from(e: &Error) -> Self {
        ErrorBody { code: e.code().to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorDoc {
    pub schema_version: u32,
    pub error: ErrorBody,
}

impl ErrorDoc {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ErrorDoc { schema_version: SCHEMA_VERSION, error: ErrorBody { code: code.into(), message: message.into() } }
    }
}

impl From<&Error> for ErrorDoc {
    fn from(e: &Error) -> Self {
        ErrorDoc { schema_version: SCHEMA_VERSION, error: e.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorDoc {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step: Option<f64>,
    pub t_end: f64,
    pub max_steps: usize,
    pub renormalize: bool,
    pub drift_abort_threshold: f64,
}

impl From<&IntegratorOptions<f64>> for IntegratorDoc {
    fn from(o: &IntegratorOptions<f64>) -> Self {
        let (method, rel_tol, abs_tol, step) = match o.method {
            Method::Rk45 { rel_tol, abs_tol } => ("rk45", Some(rel_tol), Some(abs_tol), None),
            Method::Rk4 { step } => ("rk4", None, None, Some(step)),
        };
        IntegratorDoc {
            method: method.into(),
            rel_tol,
            abs_tol,
            step,
            t_end: o.t_end,
            max_steps: o.max_steps,
            renormalize: o.renormalize,
            drift_abort_threshold: o.drift_abort_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSummary {
    /// `max_t max_k |Phi^k(t) - Phi^k(0)|`.
    pub max_constraint_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_energy_drift: Option<f64>,
    /// Per-sample constraint drift.
    pub per_sample: Vec<f64>,
}

/// A sampled trajectory, complete or cut short by a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDoc {
    pub schema_version: u32,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<ErrorBody>,
    pub model: String,
    pub engine: String,
    pub params: BTreeMap<String, f64>,
    pub integrator: IntegratorDoc,
    /// CSV header: `t`, coordinates, constraint labels, and `energy` when present.
    pub columns: Vec<String>,
    pub coordinate_names: Vec<String>,
    pub constraint_labels: Vec<String>,
    pub times: Vec<f64>,
    pub coords: Vec<Vec<f64>>,
    pub constraint_values: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub energy: Option<Vec<f64>>,
    pub drift: DriftSummary,
    pub rejected_steps: usize,
}

impl TrajectoryDoc {
    /// One line per sample, numbers in `{:.16e}` (17 significant digits).
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![*t];
            row.extend(&self.coords[i]);
            row.extend(&self.constraint_values[i]);
            if let Some(e) = &self.energy {
                row.push(e[i]);
            }
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    pub theta_count: usize,
    pub phi_count: usize,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub order: String,
    pub convention: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub theta: f64,
    pub phi: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskedNode {
    pub theta_index: usize,
    pub phi_index: usize,
    pub theta: f64,
    pub phi: f64,
    pub code: String,
}

/// Velocity field sampled on sphere 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGridDoc {
    pub schema_version: u32,
    pub model: String,
    pub engine: String,
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub partner: Option<Partner>,
    pub grid: GridDoc,
    pub samples: Vec<FieldSample>,
    pub singular_mask: Vec<MaskedNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Partner {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointDoc {
    pub coords: Vec<f64>,
    pub residual: f64,
    pub stability: String,
    pub eigenvalue_real_parts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryNode {
    pub coords: Vec<f64>,
    pub theta_dot: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointsDoc {
    pub schema_version: u32,
    pub model: String,
    pub engine: String,
    pub params: BTreeMap<String, f64>,
    pub residual_tol: f64,
    pub refined: bool,
    pub grid: GridDoc,
    pub coordinate_names: Vec<String>,
    pub points: Vec<FixedPointDoc>,
    /// Two-spin models: seed nodes where every `theta_dot` vanishes within
    /// `residual_tol`, whether or not the azimuths move.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta_stationary: Option<Vec<StationaryNode>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDoc {
    pub name: String,
    pub default: f64,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub id: String,
    pub description: String,
    pub coordinates: Vec<String>,
    pub params: Vec<ParamDoc>,
    pub engines: Vec<String>,
    pub default_engine: String,
    pub constraints: Vec<String>,
    pub has_energy: bool,
    pub needs_partner: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelsDoc {
    pub schema_version: u32,
    pub models: Vec<ModelDoc>,
}

/// Sidecar written next to CLI outputs; keeps timestamps out of the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDoc {
    pub schema_version: u32,
    pub generated_at_unix: u64,
    pub tool_version: String,
    pub data_file: String,
    pub format: String,
    pub status: Status,
}

/// Canonical serialization shared by files and HTTP bodies.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}
