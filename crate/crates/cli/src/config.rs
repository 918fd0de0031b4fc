//! Run configuration shared by the command line, config files and HTTP
//! bodies.
//!
//! Precedence, lowest first: built-in defaults, the `--config` JSON file,
//! command-line flags.

use std::collections::BTreeMap;

use qconstrain::geometry::PureState;
use qconstrain::integrate::{IntegratorOptions, Method};
use qconstrain::models::registry::{Initial, ModelInstance};
use qconstrain::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const DEFAULT_ABS_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidInput(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

/// Every field is optional so partial documents can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,
    /// Model coordinates, e.g. `[theta, phi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    /// Amplitudes as `[re, im]` pairs, for operator models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<[f64; 2]>>,
    /// `rk45` (default) or `rk4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Relative tolerance of the adaptive method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renormalize: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_abort_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    /// `top` wins wherever it sets a value; parameter maps are merged key
    /// by key.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        overlay!(
            self,
            top,
            schema_version,
            model,
            engine,
            initial,
            state,
            method,
            step,
            tol,
            abs_tol,
            t_end,
            max_steps,
            renormalize,
            drift_abort_threshold,
            out,
            format
        );
        self.params.extend(top.params);
        self
    }

    pub fn validate(&self) -> Result<ValidRun> {
        if let Some(v) = self.schema_version {
            if v != 1 {
                return Err(Error::InvalidInput(format!("unsupported schema_version {v}")));
            }
        }
        let model = self.model.as_deref().ok_or_else(|| Error::InvalidInput("no model given".into()))?;
        let instance = ModelInstance::from_names(model, &self.params, self.engine.as_deref())?;
        let initial = match (&self.initial, &self.state) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput("give either initial coordinates or a state, not both".into()))
            }
            (Some(c), None) => {
                // Closed-form models cannot start where their field is undefined.
                instance.field(c)?;
                Initial::Coords(c.clone())
            }
            (None, Some(s)) => {
                let amps: Vec<_> = s.iter().map(|[re, im]| qconstrain::Complex::new(*re, *im)).collect();
                Initial::State(PureState::from_slice(&amps)?)
            }
            (None, None) => return Err(Error::InvalidInput("no initial coordinates or state given".into())),
        };
        let options = self.options()?;
        options.validate()?;
        Ok(ValidRun { instance, initial, options, format: self.format.unwrap_or(Format::Csv) })
    }

    pub fn options(&self) -> Result<IntegratorOptions<f64>> {
        let method = match self.method.as_deref().unwrap_or("rk45") {
            "rk45" => {
                let rel_tol = self.tol.unwrap_or(DEFAULT_REL_TOL);
                let abs_tol = self.abs_tol.unwrap_or(if self.tol.is_some() { rel_tol * 1e-2 } else { DEFAULT_ABS_TOL });
                Method::Rk45 { rel_tol, abs_tol }
            }
            "rk4" => Method::Rk4 { step: self.step.ok_or_else(|| Error::InvalidInput("rk4 needs a step".into()))? },
            other => return Err(Error::InvalidInput(format!("unknown method '{other}' (expected rk45 or rk4)"))),
        };
        let defaults = IntegratorOptions::<f64>::default();
        Ok(IntegratorOptions {
            method,
            t_end: self.t_end.unwrap_or(DEFAULT_T_END),
            max_steps: self.max_steps.unwrap_or(defaults.max_steps),
            renormalize: self.renormalize.unwrap_or(defaults.renormalize),
            drift_abort_threshold: self.drift_abort_threshold.unwrap_or(defaults.drift_abort_threshold),
        })
    }
}

/// A configuration that passed validation.
#[derive(Debug, Clone)]
pub struct ValidRun {
    pub instance: ModelInstance,
    pub initial: Initial,
    pub options: IntegratorOptions<f64>,
    pub format: Format,
}

/// Parse `key=value` pairs, comma separated or repeated.
pub fn parse_params<S: AsRef<str>>(items: &[S]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        for pair in item.as_ref().split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("parameter '{pair}' is not key=value")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("parameter '{}' has non-numeric value '{v}'", k.trim())))?;
            out.insert(k.trim().to_string(), value);
        }
    }
    Ok(out)
}

/// Parse a comma-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("'{x}' is not a number"))))
        .collect()
}
