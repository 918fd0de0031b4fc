use nalgebra::{DMatrix, DVector};

use crate::constraint::{AffineChart, Chart};
use crate::error::{Error, Result};
use crate::geometry::{fs_distance, PureState, TangentVector};
use crate::scalar::{lit, Real};

/// Eigenvalue real parts with magnitude below this count as zero.
pub const CLASSIFICATION_THRESHOLD: f64 = 1e-6;
/// Candidates closer than this are merged.
pub const MERGE_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Attracting,
    Repelling,
    Saddle,
    Neutral,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Attracting => "attracting",
            Stability::Repelling => "repelling",
            Stability::Saddle => "saddle",
            Stability::Neutral => "neutral",
        }
    }

    /// From the real parts of the linearization's eigenvalues.
    pub fn from_real_parts<T: Real>(re: &[T]) -> Self {
        let thr: T = lit(CLASSIFICATION_THRESHOLD);
        let neg = re.iter().any(|r| *r < -thr);
        let pos = re.iter().any(|r| *r > thr);
        match (neg, pos) {
            (true, true) => Stability::Saddle,
            (true, false) => Stability::Attracting,
            (false, true) => Stability::Repelling,
            (false, false) => Stability::Neutral,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<T: Real> {
    pub point: DVector<T>,
    /// Euclidean norm of the field at `point`.
    pub residual: T,
    pub stability: Stability,
    pub eigenvalue_real_parts: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOptions<T: Real> {
    pub residual_tol: T,
    /// Polish each seed with damped Newton steps; otherwise seeds are only
    /// filtered by residual.
    pub refine: bool,
    pub max_iters: usize,
    pub merge_radius: T,
    /// Per-coordinate period used when comparing and reporting points.
    pub periods: Vec<Option<T>>,
    /// Per-coordinate open interval; refined points outside are dropped.
    pub bounds: Vec<Option<(T, T)>>,
}

impl<T: Real> FixedPointOptions<T> {
    pub fn new(residual_tol: T) -> Self {
        Self {
            residual_tol,
            refine: true,
            max_iters: 50,
            merge_radius: lit(MERGE_RADIUS),
            periods: Vec::new(),
            bounds: Vec::new(),
        }
    }

    pub fn scan_only(mut self) -> Self {
        self.refine = false;
        self
    }

    pub fn with_periods(mut self, periods: Vec<Option<T>>) -> Self {
        self.periods = periods;
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<Option<(T, T)>>) -> Self {
        self.bounds = bounds;
        self
    }

    fn wrap(&self, mut p: DVector<T>) -> DVector<T> {
        for (i, per) in self.periods.iter().enumerate() {
            if let (Some(per), Some(x)) = (per, p.get_mut(i)) {
                *x -= *per * (*x / *per).floor();
            }
        }
        p
    }

    fn in_bounds(&self, p: &DVector<T>) -> bool {
        self.bounds.iter().enumerate().all(|(i, b)| match (b, p.get(i)) {
            (Some((lo, hi)), Some(x)) => *x > *lo && *x < *hi,
            _ => true,
        })
    }

    fn distance(&self, a: &DVector<T>, b: &DVector<T>) -> T {
        let mut s = T::zero();
        for i in 0..a.len() {
            let mut d = (a[i] - b[i]).abs();
            if let Some(Some(per)) = self.periods.get(i) {
                d -= *per * (d / *per).floor();
                d = d.min(*per - d);
            }
            s += d * d;
        }
        s.sqrt()
    }
}

/// Central-difference Jacobian of a vector field.
pub fn jacobian<T: Real, F>(field: &F, x: &DVector<T>) -> Result<DMatrix<T>>
where
    F: Fn(&DVector<T>) -> Result<DVector<T>> + ?Sized,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let h = lit::<T>(1e-6) * x[j].abs().max(T::one());
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let d = (field(&xp)? - field(&xm)?) / (h + h);
        if d.len() != n {
            return Err(Error::Dimension { expected: n, found: d.len() });
        }
        jac.set_column(j, &d);
    }
    Ok(jac)
}

/// Stability from the eigenvalues of the linearization at `x`.
pub fn classify<T: Real, F>(field: &F, x: &DVector<T>) -> Result<(Stability, Vec<T>)>
where
    F: Fn(&DVector<T>) -> Result<DVector<T>> + ?Sized,
{
    let jac = jacobian(field, x)?;
    let re: Vec<T> = jac.complex_eigenvalues().iter().map(|z| z.re).collect();
    Ok((Stability::from_real_parts(&re), re))
}

/// Damped Gauss-Newton with a pseudo-inverse, so it also converges onto
/// curves of fixed points where the Jacobian is rank deficient.
fn newton<T: Real, F>(field: &F, x0: &DVector<T>, max_iters: usize, tol: T) -> Option<(DVector<T>, T)>
where
    F: Fn(&DVector<T>) -> Result<DVector<T>> + ?Sized,
{
    let mut x = x0.clone();
    let mut f = field(&x).ok()?;
    let mut r = f.norm();
    for _ in 0..max_iters {
        if r <= tol * lit(1e-2) || r == T::zero() {
            break;
        }
        let jac = jacobian(field, &x).ok()?;
        let svd = jac.svd(true, true);
        let cutoff = svd.singular_values.max() * lit(1e-10);
        let step = svd.solve(&f, cutoff).ok()?;
        let mut alpha = T::one();
        let mut improved = false;
        for _ in 0..30 {
            let cand = &x - &step * alpha;
            if let Ok(fc) = field(&cand) {
                let rc = fc.norm();
                if rc < r {
                    x = cand;
                    f = fc;
                    r = rc;
                    improved = true;
                    break;
                }
            }
            alpha *= lit(0.5);
        }
        if !improved {
            break;
        }
    }
    (r.is_finite()).then_some((x, r))
}

/// Fixed points of a coordinate field near the given seeds.
///
/// Candidates with residual above `residual_tol` are dropped and the rest
/// merged: of two points within `merge_radius`, the one with the smaller
/// residual survives (the earlier one on ties). Seeds where the field
/// cannot be evaluated are skipped.
pub fn find_fixed_points<T: Real, F>(
    field: &F,
    seeds: &[DVector<T>],
    opts: &FixedPointOptions<T>,
) -> Result<Vec<FixedPoint<T>>>
where
    F: Fn(&DVector<T>) -> Result<DVector<T>> + ?Sized,
{
    if seeds.is_empty() {
        return Err(Error::InvalidInput("empty search set".into()));
    }
    let mut found: Vec<(DVector<T>, T)> = Vec::new();
    for seed in seeds {
        let candidate = if opts.refine {
            newton(field, seed, opts.max_iters, opts.residual_tol)
        } else {
            field(seed).ok().map(|f| (seed.clone(), f.norm()))
        };
        let Some((p, r)) = candidate else { continue };
        if r > opts.residual_tol || !opts.in_bounds(&p) {
            continue;
        }
        let p = opts.wrap(p);
        merge(&mut found, p, r, |a, b| opts.distance(a, b) < opts.merge_radius);
    }
    found
        .into_iter()
        .map(|(point, residual)| {
            let (stability, eigenvalue_real_parts) = classify(field, &point)?;
            Ok(FixedPoint { point, residual, stability, eigenvalue_real_parts })
        })
        .collect()
}

fn merge<P, T: Real>(found: &mut Vec<(P, T)>, p: P, r: T, close: impl Fn(&P, &P) -> bool) {
    match found.iter_mut().find(|(q, _)| close(q, &p)) {
        Some(slot) => {
            if r < slot.1 {
                *slot = (p, r);
            }
        }
        None => found.push((p, r)),
    }
}

#[derive(Debug, Clone)]
pub struct StateFixedPoint<T: Real> {
    pub state: PureState<T>,
    /// Norm of the tangent velocity at `state`.
    pub residual: T,
    pub stability: Stability,
    pub eigenvalue_real_parts: Vec<T>,
}

/// Fixed points of a flow on state space, seeded by states. Each seed is
/// refined in its own gauge affine chart; results are merged by
/// Fubini-Study distance.
pub fn find_state_fixed_points<T: Real, F>(
    velocity: &F,
    seeds: &[PureState<T>],
    opts: &FixedPointOptions<T>,
) -> Result<Vec<StateFixedPoint<T>>>
where
    F: Fn(&PureState<T>) -> Result<TangentVector<T>> + ?Sized,
{
    if seeds.is_empty() {
        return Err(Error::InvalidInput("empty search set".into()));
    }
    let mut found: Vec<((PureState<T>, AffineChart), T)> = Vec::new();
    for seed in seeds {
        let chart = AffineChart::gauge(seed);
        let local = |u: &DVector<T>| -> Result<DVector<T>> { chart.pushforward(&velocity(&chart.embed(u)?)?) };
        let Ok(u0) = chart.coords_of(seed) else { continue };
        let u = if opts.refine {
            match newton(&local, &u0, opts.max_iters, opts.residual_tol) {
                Some((u, _)) => u,
                None => continue,
            }
        } else {
            u0
        };
        let Ok(state) = chart.embed(&u) else { continue };
        let Ok(v) = velocity(&state) else { continue };
        let r = v.norm();
        if r > opts.residual_tol {
            continue;
        }
        let radius = opts.merge_radius;
        merge(&mut found, (state, chart), r, |a, b| fs_distance(&a.0, &b.0).map(|d| d < radius).unwrap_or(false));
    }
    found
        .into_iter()
        .map(|((state, chart), residual)| {
            let local = |u: &DVector<T>| -> Result<DVector<T>> { chart.pushforward(&velocity(&chart.embed(u)?)?) };
            let (stability, eigenvalue_real_parts) = classify(&local, &chart.coords_of(&state)?)?;
            Ok(StateFixedPoint { state, residual, stability, eigenvalue_real_parts })
        })
        .collect()
}
