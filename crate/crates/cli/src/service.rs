//! HTTP service.
//!
//! | route              | body                        |
//! |--------------------|-----------------------------|
//! | `GET /health`      | `{"status":"ok"}`           |
//! | `GET /models`      | registry listing            |
//! | `POST /field`      | [`FieldRequest`]            |
//! | `POST /trajectory` | [`RunConfig`] without paths |
//!
//! Errors are `{"schema_version":1,"error":{"code":..,"message":..}}` with
//! status 400 for invalid input, 404 for unknown models and 422 when the
//! computation hits a singularity or fails along the way. Handlers share no
//! state; computation runs on the blocking pool.

use std::collections::BTreeMap;
use std::net::SocketAddr;

use axum::body::Bytes;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use qconstrain::models::registry::{GridSpec, ModelInstance};
use qconstrain::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::docs::{to_json, ErrorBody, ErrorDoc, Partner, TrajectoryDoc, SCHEMA_VERSION};
use crate::ops;

pub const MAX_GRID_SIDE: usize = 256;
pub const MAX_T_END: f64 = 1e4;
pub const MAX_STEPS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRequest {
    pub theta_count: usize,
    pub phi_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub model: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<Partner>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureDoc {
    pub schema_version: u32,
    pub error: ErrorBody,
    pub partial: TrajectoryDoc,
}

pub fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::UnknownModel(_) => StatusCode::NOT_FOUND,
        e if e.is_singularity() || ops::is_computational(e) => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::BAD_REQUEST,
    }
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(e: &Error) -> Response {
    json(status_for(e), to_json(&ErrorDoc::from(e)))
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, Response> {
    let value: serde_json::Value = serde_json::from_slice(body)
        .map_err(|e| json(StatusCode::BAD_REQUEST, to_json(&ErrorDoc::new("MalformedJson", e.to_string()))))?;
    serde_json::from_value(value).map_err(|e| error_response(&Error::InvalidInput(e.to_string())))
}

fn check_schema(v: Option<u32>) -> Result<(), Error> {
    match v {
        Some(v) if v != SCHEMA_VERSION => Err(Error::InvalidInput(format!("unsupported schema_version {v}"))),
        _ => Ok(()),
    }
}

async fn blocking<F>(f: F) -> Response
where
    F: FnOnce() -> Response + Send + 'static,
{
    tokio::task::spawn_blocking(f).await.unwrap_or_else(|e| {
        log::error!("request handler panicked: {e}");
        json(StatusCode::INTERNAL_SERVER_ERROR, to_json(&ErrorDoc::new("InternalError", "request handler failed")))
    })
}

async fn health() -> Response {
    json(StatusCode::OK, r#"{"status":"ok"}"#.to_string())
}

async fn list_models() -> Response {
    json(StatusCode::OK, to_json(&ops::models_doc()))
}

pub fn field_response(req: FieldRequest) -> Result<String, Error> {
    check_schema(req.schema_version)?;
    let instance = ModelInstance::from_names(&req.model, &req.params, req.engine.as_deref())?;
    let grid = match req.grid {
        Some(g) => {
            if g.theta_count > MAX_GRID_SIDE || g.phi_count > MAX_GRID_SIDE {
                return Err(Error::InvalidInput(format!("grid sides are limited to {MAX_GRID_SIDE}")));
            }
            GridSpec::new(g.theta_count, g.phi_count)?
        }
        None => GridSpec::new(ops::DEFAULT_FIELD_GRID, ops::DEFAULT_FIELD_GRID)?,
    };
    Ok(to_json(&ops::field_grid(&instance, &grid, req.partner)?))
}

async fn field(body: Bytes) -> Response {
    let req: FieldRequest = match parse(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    blocking(move || match field_response(req) {
        Ok(body) => json(StatusCode::OK, body),
        Err(e) => error_response(&e),
    })
    .await
}

pub fn trajectory_response(mut cfg: RunConfig) -> Response {
    if cfg.out.is_some() || cfg.format.is_some() {
        return error_response(&Error::InvalidInput("out and format are command-line options".into()));
    }
    if cfg.t_end.is_some_and(|t| t > MAX_T_END) {
        return error_response(&Error::InvalidInput(format!("t_end is limited to {MAX_T_END}")));
    }
    match cfg.max_steps {
        Some(n) if n > MAX_STEPS => {
            return error_response(&Error::InvalidInput(format!("max_steps is limited to {MAX_STEPS}")))
        }
        None => cfg.max_steps = Some(MAX_STEPS),
        _ => {}
    }
    let run = match cfg.validate() {
        Ok(r) => r,
        Err(e) => return error_response(&e),
    };
    match ops::simulate(&run) {
        Ok(ops::SimulationResult { doc, error: None }) => json(StatusCode::OK, to_json(&doc)),
        Ok(ops::SimulationResult { doc, error: Some(e) }) => json(
            status_for(&e),
            to_json(&FailureDoc { schema_version: SCHEMA_VERSION, error: (&e).into(), partial: doc }),
        ),
        Err(e) => error_response(&e),
    }
}

async fn trajectory(body: Bytes) -> Response {
    let cfg: RunConfig = match parse(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    blocking(move || trajectory_response(cfg)).await
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/models", get(list_models))
        .route("/field", post(field))
        .route("/trajectory", post(trajectory))
}

/// Serve until interrupted.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
