use nalgebra::DVector;

use super::dynamics::{Dynamics, FieldValue};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Condition estimate above which a step is retried at half size.
pub const CONDITION_LIMIT: f64 = 1e6;
/// Consecutive step halvings tried before giving up with `FieldError`.
pub const MAX_RETRIES: usize = 10;
/// Largest monitored residual accepted at the initial point.
pub const INITIAL_RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method<T: Real> {
    Rk4 { step: T },
    Rk45 { rel_tol: T, abs_tol: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions<T: Real> {
    pub method: Method<T>,
    pub t_end: T,
    pub max_steps: usize,
    pub renormalize: bool,
    pub drift_abort_threshold: T,
}

impl<T: Real> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self {
            method: Method::Rk45 { rel_tol: lit(1e-9), abs_tol: lit(1e-11) },
            t_end: T::one(),
            max_steps: 1_000_000,
            renormalize: true,
            drift_abort_threshold: lit(1e-4),
        }
    }
}

impl<T: Real> IntegratorOptions<T> {
    pub fn rk4(step: T, t_end: T) -> Self {
        Self { method: Method::Rk4 { step }, t_end, ..Self::default() }
    }

    pub fn rk45(rel_tol: T, abs_tol: T, t_end: T) -> Self {
        Self { method: Method::Rk45 { rel_tol, abs_tol }, t_end, ..Self::default() }
    }

    pub fn with_renormalize(mut self, on: bool) -> Self {
        self.renormalize = on;
        self
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    pub fn with_drift_abort(mut self, threshold: T) -> Self {
        self.drift_abort_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        match self.method {
            Method::Rk4 { step } if !(step > T::zero() && step.is_finite()) => return bad("step must be positive"),
            Method::Rk45 { rel_tol, abs_tol }
                if !(rel_tol > T::zero() && abs_tol > T::zero() && rel_tol.is_finite() && abs_tol.is_finite()) =>
            {
                return bad("tolerances must be positive")
            }
            _ => {}
        }
        if !(self.t_end >= T::zero() && self.t_end.is_finite()) {
            return bad("t_end must be finite and non-negative");
        }
        if self.max_steps < 1 {
            return bad("max_steps must be at least 1");
        }
        if !(self.drift_abort_threshold > T::zero()) {
            return bad("drift_abort_threshold must be positive");
        }
        Ok(())
    }
}

/// Sampled solution, one row per accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub points: Vec<DVector<T>>,
    /// Monitored values at each sample.
    pub constraint_values: Vec<Vec<T>>,
    pub constraint_labels: Vec<String>,
    pub energy_series: Option<Vec<T>>,
    /// Per monitored quantity, `max_t |Phi(x(t)) - Phi(x(0))|`.
    pub drift: Vec<T>,
    pub rejected_steps: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &DVector<T> {
        self.points.last().expect("trajectory holds the initial point")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory holds the initial point")
    }

    pub fn max_drift(&self) -> T {
        self.drift.iter().fold(T::zero(), |m, d| m.max(*d))
    }

    /// `max_t |H(x(t)) - H(x(0))|`, if energy is defined.
    pub fn energy_drift(&self) -> Option<T> {
        let e = self.energy_series.as_ref()?;
        let e0 = *e.first()?;
        Some(e.iter().fold(T::zero(), |m, v| m.max((*v - e0).abs())))
    }

    fn push(&mut self, t: T, y: DVector<T>, values: Vec<T>, energy: Option<T>) {
        if let Some(first) = self.constraint_values.first() {
            for (d, (v, v0)) in self.drift.iter_mut().zip(values.iter().zip(first)) {
                *d = d.max((*v - *v0).abs());
            }
        }
        self.times.push(t);
        self.points.push(y);
        self.constraint_values.push(values);
        if let (Some(series), Some(e)) = (self.energy_series.as_mut(), energy) {
            series.push(e);
        }
    }
}

/// Failure after integration started; `partial` ends at the last good state.
#[derive(Debug, Clone)]
pub struct IntegrationFailure<T: Real> {
    pub error: Error,
    pub partial: Trajectory<T>,
}

impl<T: Real> std::fmt::Display for IntegrationFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} samples)", self.error, self.partial.len())
    }
}

impl<T: Real> std::error::Error for IntegrationFailure<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl<T: Real> From<IntegrationFailure<T>> for Error {
    fn from(f: IntegrationFailure<T>) -> Self {
        f.error
    }
}

/// Dormand-Prince 5(4) tableau.
mod dopri {
    // Nodes c = (0, 1/5, 3/10, 4/5, 8/9, 1, 1) are not needed: every
    // system here is autonomous.
    pub const A: [&[f64]; 7] = [
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    /// Fifth-order weights (equal to the last row of `A`, so FSAL).
    pub const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    /// Difference between fifth- and fourth-order weights.
    pub const E: [f64; 7] =
        [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
}

enum StepError {
    /// Worth retrying with a smaller step.
    Field(Error),
    IllConditioned(f64),
}

fn eval<T: Real, D: Dynamics<T>>(dyn_: &D, y: &DVector<T>) -> std::result::Result<DVector<T>, StepError> {
    match dyn_.velocity(y) {
        Ok(FieldValue { velocity, condition }) => {
            let c = to_f64(condition);
            if c > CONDITION_LIMIT || !c.is_finite() {
                Err(StepError::IllConditioned(c))
            } else if velocity.iter().any(|v| !v.is_finite()) {
                Err(StepError::Field(Error::Evaluation("non-finite velocity".into())))
            } else {
                Ok(velocity)
            }
        }
        Err(e) => Err(StepError::Field(e)),
    }
}

fn rk4_step<T: Real, D: Dynamics<T>>(d: &D, y: &DVector<T>, h: T) -> std::result::Result<DVector<T>, StepError> {
    let half = h * lit(0.5);
    let k1 = eval(d, y)?;
    let k2 = eval(d, &(y + &k1 * half))?;
    let k3 = eval(d, &(y + &k2 * half))?;
    let k4 = eval(d, &(y + &k3 * h))?;
    Ok(y + (k1 + (k2 + k3) * lit::<T>(2.0) + k4) * (h / lit(6.0)))
}

/// One Dormand-Prince step from `(y, k1)`; returns the new point, its
/// velocity (reused as the next `k1`) and the error estimate vector.
fn dopri_step<T: Real, D: Dynamics<T>>(
    d: &D,
    y: &DVector<T>,
    k1: &DVector<T>,
    h: T,
) -> std::result::Result<(DVector<T>, DVector<T>, DVector<T>), StepError> {
    let mut k: Vec<DVector<T>> = Vec::with_capacity(7);
    k.push(k1.clone());
    for row in dopri::A.iter().skip(1) {
        let mut yi = y.clone();
        for (j, a) in row.iter().enumerate() {
            if *a != 0.0 {
                yi += &k[j] * (h * lit(*a));
            }
        }
        let ki = eval(d, &yi)?;
        k.push(ki);
    }
    let mut y_new = y.clone();
    let mut err = DVector::zeros(y.len());
    for (i, ki) in k.iter().enumerate() {
        if dopri::B[i] != 0.0 {
            y_new += ki * (h * lit(dopri::B[i]));
        }
        if dopri::E[i] != 0.0 {
            err += ki * (h * lit(dopri::E[i]));
        }
    }
    let k7 = k.pop().expect("seven stages");
    Ok((y_new, k7, err))
}

fn error_norm<T: Real>(err: &DVector<T>, y0: &DVector<T>, y1: &DVector<T>, rtol: T, atol: T) -> T {
    let n: T = lit(err.len() as f64);
    let sum = err.iter().zip(y0.iter().zip(y1.iter())).fold(T::zero(), |s, (e, (a, b))| {
        let sc = atol + rtol * a.abs().max(b.abs());
        let r = *e / sc;
        s + r * r
    });
    (sum / n).sqrt()
}

fn rms_scaled<T: Real>(v: &DVector<T>, y: &DVector<T>, rtol: T, atol: T) -> T {
    error_norm(v, y, y, rtol, atol)
}

/// Initial step heuristic from Hairer, Norsett and Wanner.
fn initial_step<T: Real, D: Dynamics<T>>(d: &D, y: &DVector<T>, f0: &DVector<T>, rtol: T, atol: T, span: T) -> T {
    let d0 = rms_scaled(y, y, rtol, atol);
    let d1 = rms_scaled(f0, y, rtol, atol);
    let tiny: T = lit(1e-5);
    let h0 = if d0 < tiny || d1 < tiny { lit(1e-6) } else { lit::<T>(0.01) * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = y + f0 * h0;
    let d2 = match d.velocity(&y1) {
        Ok(fv) => rms_scaled(&(fv.velocity - f0), y, rtol, atol) / h0,
        Err(_) => return h0,
    };
    let m = d1.max(d2);
    let h1 = if m <= lit(1e-15) { (h0 * lit(1e-3)).max(lit(1e-6)) } else { (lit::<T>(0.01) / m).powf(lit(0.2)) };
    (h0 * lit(100.0)).min(h1).min(span)
}

struct Runner<'a, T: Real, D: Dynamics<T>> {
    d: &'a D,
    opts: &'a IntegratorOptions<T>,
    traj: Trajectory<T>,
    steps: usize,
}

impl<'a, T: Real, D: Dynamics<T>> Runner<'a, T, D> {
    fn fail(self, error: Error) -> IntegrationFailure<T> {
        IntegrationFailure { error, partial: self.traj }
    }

    /// Record an accepted point, enforcing the drift and step limits.
    fn accept(&mut self, t: T, mut y: DVector<T>) -> std::result::Result<DVector<T>, Error> {
        if self.opts.renormalize {
            self.d.renormalize(&mut y);
        }
        let values = self.d.monitored(&y)?;
        let energy = self.d.energy(&y)?;
        self.traj.push(t, y.clone(), values, energy);
        self.steps += 1;
        let drift = self.traj.max_drift();
        if drift > self.opts.drift_abort_threshold || !drift.is_finite() {
            return Err(Error::DriftAbort {
                drift: to_f64(drift),
                threshold: to_f64(self.opts.drift_abort_threshold),
                t: to_f64(t),
            });
        }
        Ok(y)
    }

    fn step_limit(&self, t: T) -> Error {
        Error::StepLimit { max_steps: self.opts.max_steps, t: to_f64(t) }
    }
}

fn retry_error(t: f64, e: StepError) -> Error {
    let source = match e {
        StepError::Field(e) => e,
        StepError::IllConditioned(c) => {
            Error::Evaluation(format!("constraint matrix condition estimate {c:.3e} exceeds {CONDITION_LIMIT:.0e}"))
        }
    };
    Error::Field { t, source: Box::new(source) }
}

/// Integrate `d` from `y0` over `[0, opts.t_end]`.
///
/// Every accepted step is recorded. Monitored quantities must start within
/// [`INITIAL_RESIDUAL_TOLERANCE`] of `targets` when targets are given.
pub fn integrate<T: Real, D: Dynamics<T>>(
    d: &D,
    y0: &DVector<T>,
    opts: &IntegratorOptions<T>,
) -> std::result::Result<Trajectory<T>, IntegrationFailure<T>> {
    integrate_with_targets(d, y0, None, opts)
}

pub fn integrate_with_targets<T: Real, D: Dynamics<T>>(
    d: &D,
    y0: &DVector<T>,
    targets: Option<&[T]>,
    opts: &IntegratorOptions<T>,
) -> std::result::Result<Trajectory<T>, IntegrationFailure<T>> {
    let empty = Trajectory {
        times: Vec::new(),
        points: Vec::new(),
        constraint_values: Vec::new(),
        constraint_labels: d.monitored_labels(),
        energy_series: None,
        drift: Vec::new(),
        rejected_steps: 0,
    };
    let early = |error: Error, partial: &Trajectory<T>| IntegrationFailure { error, partial: partial.clone() };
    if let Err(e) = opts.validate() {
        return Err(early(e, &empty));
    }
    if y0.len() != d.dim() {
        return Err(early(Error::Dimension { expected: d.dim(), found: y0.len() }, &empty));
    }
    let values0 = d.monitored(y0).map_err(|e| early(e, &empty))?;
    if let Some(targets) = targets {
        for (v, t) in values0.iter().zip(targets) {
            let r = to_f64((*v - *t).abs());
            if r > INITIAL_RESIDUAL_TOLERANCE {
                return Err(early(
                    Error::InvalidInput(format!("initial constraint residual {r:.3e} exceeds 1e-8")),
                    &empty,
                ));
            }
        }
    }
    let energy0 = d.energy(y0).map_err(|e| early(e, &empty))?;
    let mut traj = empty;
    traj.drift = vec![T::zero(); values0.len()];
    traj.energy_series = energy0.map(|_| Vec::new());
    traj.push(T::zero(), y0.clone(), values0, energy0);

    let mut run = Runner { d, opts, traj, steps: 0 };
    let outcome = match opts.method {
        Method::Rk4 { step } => run_rk4(&mut run, y0.clone(), step),
        Method::Rk45 { rel_tol, abs_tol } => run_rk45(&mut run, y0.clone(), rel_tol, abs_tol),
    };
    match outcome {
        Ok(()) => Ok(run.traj),
        Err(e) => Err(run.fail(e)),
    }
}

/// Fixed steps on the grid `k * step`; a failing step is split into
/// `2^attempt` substeps, leaving the recorded grid unchanged.
fn run_rk4<T: Real, D: Dynamics<T>>(run: &mut Runner<'_, T, D>, mut y: DVector<T>, step: T) -> Result<()> {
    let t_end = run.opts.t_end;
    let mut t = T::zero();
    let n = to_f64(t_end / step).ceil() as usize;
    for i in 0..n {
        if run.steps >= run.opts.max_steps {
            return Err(run.step_limit(t));
        }
        let t_next = if i + 1 == n { t_end } else { step * lit((i + 1) as f64) };
        let mut attempt = 0;
        let y_next = loop {
            let pieces = 1usize << attempt;
            let h = (t_next - t) / lit(pieces as f64);
            let mut local = y.clone();
            let mut failure = None;
            for _ in 0..pieces {
                match rk4_step(run.d, &local, h) {
                    Ok(v) => local = v,
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            match failure {
                None => break local,
                Some(e) => {
                    attempt += 1;
                    run.traj.rejected_steps += 1;
                    if attempt > MAX_RETRIES {
                        return Err(retry_error(to_f64(t), e));
                    }
                }
            }
        };
        y = run.accept(t_next, y_next)?;
        t = t_next;
    }
    Ok(())
}

fn run_rk45<T: Real, D: Dynamics<T>>(run: &mut Runner<'_, T, D>, mut y: DVector<T>, rtol: T, atol: T) -> Result<()> {
    let t_end = run.opts.t_end;
    let mut t = T::zero();
    if t_end == T::zero() {
        return Ok(());
    }
    let mut k1 = match eval(run.d, &y) {
        Ok(k) => k,
        Err(e) => return Err(retry_error(0.0, e)),
    };
    let mut h = initial_step(run.d, &y, &k1, rtol, atol, t_end);
    let min_step: T = lit::<T>(1e-14) * t_end.max(T::one());
    // A failure episode starts at the first field failure and ends once a
    // step of the original size succeeds again; within it the step never
    // grows and at most MAX_RETRIES halvings are allowed.
    let mut retries = 0;
    let mut episode: Option<T> = None;
    while t < t_end {
        if run.steps >= run.opts.max_steps {
            return Err(run.step_limit(t));
        }
        let last = t + h >= t_end;
        let hh = if last { t_end - t } else { h };
        match dopri_step(run.d, &y, &k1, hh) {
            Ok((y_new, k_new, err)) => {
                let en = error_norm(&err, &y, &y_new, rtol, atol);
                let mut factor = if en == T::zero() {
                    lit(10.0)
                } else {
                    (lit::<T>(0.9) * en.powf(lit(-0.2))).max(lit(0.2)).min(lit(10.0))
                };
                if let Some(anchor) = episode {
                    if hh >= anchor || last {
                        episode = None;
                        retries = 0;
                    } else {
                        factor = factor.min(T::one());
                    }
                }
                if en <= T::one() {
                    t = if last { t_end } else { t + hh };
                    let renorm = run.opts.renormalize;
                    let before = y_new.clone();
                    y = run.accept(t, y_new)?;
                    // Renormalization moves the point, so the FSAL stage is stale.
                    k1 = if renorm && y != before {
                        eval(run.d, &y).map_err(|e| retry_error(to_f64(t), e))?
                    } else {
                        k_new
                    };
                } else {
                    run.traj.rejected_steps += 1;
                }
                h = hh * factor;
            }
            Err(e) => {
                episode.get_or_insert(hh);
                retries += 1;
                run.traj.rejected_steps += 1;
                if retries > MAX_RETRIES {
                    return Err(retry_error(to_f64(t), e));
                }
                h = hh * lit(0.5);
            }
        }
        if h < min_step {
            return Err(Error::Field {
                t: to_f64(t),
                source: Box::new(Error::Evaluation("step size underflow".into())),
            });
        }
    }
    Ok(())
}
