use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use qconstrain::models::registry::{GridSpec, ModelInstance};
use qconstrain::Error;
use qconstrain_cli::config::{parse_list, parse_params, Format, RunConfig};
use qconstrain_cli::docs::{to_json, MetaDoc, Partner, Status, SCHEMA_VERSION};
use qconstrain_cli::{ops, service};

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;

/// Constrained quantum dynamics: simulations, field grids and fixed points.
///
/// Values from `--config` are overridden by command-line flags.
#[derive(Parser, Debug)]
#[command(name = "qconstrain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a trajectory and write CSV or JSON.
    Simulate(SimulateArgs),
    /// Sample the velocity field on a (theta, phi) grid of sphere 1.
    Field(FieldArgs),
    /// Locate and classify fixed points.
    FixedPoints(FixedPointArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model id, see `GET /models`.
    #[arg(long)]
    model: Option<String>,
    /// Parameters as key=value, comma separated or repeated.
    #[arg(long = "params", value_name = "KEY=VAL")]
    params: Vec<String>,
    /// symplectic, metric, closed-form or unconstrained.
    #[arg(long)]
    engine: Option<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial coordinates, e.g. `0.3,0.2`.
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Relative tolerance (rk45).
    #[arg(long)]
    tol: Option<f64>,
    /// Absolute tolerance (rk45); defaults to tol / 100.
    #[arg(long)]
    abs_tol: Option<f64>,
    /// rk45 or rk4.
    #[arg(long)]
    method: Option<String>,
    /// Step size (rk4).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Do not rescale state vectors to unit norm after each step.
    #[arg(long)]
    no_renormalize: bool,
    #[arg(long)]
    drift_abort: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Grid as NxM (theta count x phi count).
    #[arg(long, default_value = "24x24")]
    grid: String,
    /// Sphere-2 coordinates `theta2,phi2` for two-spin models.
    #[arg(long, allow_hyphen_values = true)]
    partner: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FixedPointArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Seed grid as NxM; 50x50 for one spin, 6x6 per sphere for two.
    #[arg(long)]
    grid: Option<String>,
    /// Residual tolerance.
    #[arg(long, default_value_t = ops::DEFAULT_RESIDUAL_TOL)]
    tol: f64,
    /// Report grid nodes below tolerance without Newton refinement.
    #[arg(long)]
    no_refine: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
}

enum Failure {
    Io(String),
    Invalid(Error),
    Computation(Error),
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Io(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(EXIT_IO)
            }
            Failure::Invalid(e) => {
                eprintln!("error [{}]: {e}", e.code());
                ExitCode::from(EXIT_INVALID)
            }
            Failure::Computation(e) => {
                eprintln!("error [{}]: {e}", e.code());
                ExitCode::from(EXIT_COMPUTATION)
            }
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if ops::is_computational(&e) {
            Failure::Computation(e)
        } else {
            Failure::Invalid(e)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QCONSTRAIN_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Field(a) => field(a),
        Command::FixedPoints(a) => fixed_points(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

fn base_config(m: &ModelArgs) -> Result<RunConfig, Failure> {
    let file = match &m.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        model: m.model.clone(),
        params: parse_params(&m.params)?,
        engine: m.engine.clone(),
        ..Default::default()
    };
    Ok(file.overlay(flags))
}

fn instance_of(cfg: &RunConfig) -> Result<ModelInstance, Failure> {
    let model = cfg.model.as_deref().ok_or_else(|| Error::InvalidInput("no model given".into()))?;
    Ok(ModelInstance::from_names(model, &cfg.params, cfg.engine.as_deref())?)
}

fn write_output(out: Option<&Path>, body: &str, format: &str, status: Status) -> Result<(), Failure> {
    let Some(path) = out else {
        print!("{body}");
        return Ok(());
    };
    std::fs::write(path, body).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    let meta = MetaDoc {
        schema_version: SCHEMA_VERSION,
        generated_at_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        data_file: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        format: format.into(),
        status,
    };
    let mut meta_path = path.as_os_str().to_owned();
    meta_path.push(".meta.json");
    std::fs::write(&meta_path, to_json(&meta))
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", PathBuf::from(&meta_path).display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let flags = RunConfig {
        initial: a.initial.as_deref().map(parse_list).transpose()?,
        t_end: a.t_end,
        tol: a.tol,
        abs_tol: a.abs_tol,
        method: a.method,
        step: a.step,
        max_steps: a.max_steps,
        renormalize: a.no_renormalize.then_some(false),
        drift_abort_threshold: a.drift_abort,
        out: a.out.map(|p| p.to_string_lossy().into_owned()),
        format: a.format.as_deref().map(str::parse::<Format>).transpose()?,
        ..Default::default()
    };
    let cfg = base_config(&a.model)?.overlay(flags);
    let run = cfg.validate().map_err(Failure::Invalid)?;
    let result = ops::simulate(&run).map_err(Failure::Computation)?;
    let (body, name) = match run.format {
        Format::Csv => (result.doc.to_csv(), "csv"),
        Format::Json => (to_json(&result.doc), "json"),
    };
    write_output(cfg.out.as_deref().map(Path::new), &body, name, result.doc.status)?;
    match result.error {
        None => Ok(()),
        Some(e) => Err(Failure::Computation(e)),
    }
}

fn field(a: FieldArgs) -> Result<(), Failure> {
    let cfg = base_config(&a.model)?;
    let instance = instance_of(&cfg)?;
    let grid = ops::parse_grid(&a.grid)?;
    let partner = match a.partner.as_deref().map(parse_list).transpose()? {
        Some(v) if v.len() == 2 => Some(Partner { theta: v[0], phi: v[1] }),
        Some(_) => return Err(Error::InvalidInput("partner must be theta2,phi2".into()).into()),
        None => None,
    };
    let doc = ops::field_grid(&instance, &grid, partner).map_err(Failure::Invalid)?;
    write_output(a.out.as_deref(), &to_json(&doc), "json", Status::Complete)
}

fn fixed_points(a: FixedPointArgs) -> Result<(), Failure> {
    let cfg = base_config(&a.model)?;
    let instance = instance_of(&cfg)?;
    let grid: GridSpec = match &a.grid {
        Some(g) => ops::parse_grid(g)?,
        None => ops::default_fixed_point_grid(&instance),
    };
    let doc = ops::fixed_points(&instance, &grid, a.tol, !a.no_refine)?;
    write_output(a.out.as_deref(), &to_json(&doc), "json", Status::Complete)
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    runtime.block_on(service::serve(SocketAddr::new(a.host, a.port))).map_err(|e| Failure::Io(format!("server: {e}")))
}
