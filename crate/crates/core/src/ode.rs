//! Adaptive integration of `r'' = rhs(x, r)` with the Dormand-Prince 5(4)
//! pair, quintic Hermite dense output, and finite-difference residuals of
//! sampled solutions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::calculus::{fornberg_weights, Interval};
use crate::error::{Error, Result};

pub type RhsFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// `r'' = rhs(x, r)` on an open interval. The right-hand side does not
/// depend on `r'`.
#[derive(Clone)]
pub struct SecondOrderOde {
    rhs: RhsFn,
    domain: Interval,
}

impl fmt::Debug for SecondOrderOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecondOrderOde")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl SecondOrderOde {
    pub fn new(rhs: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, domain: Interval) -> Self {
        Self {
            rhs: Arc::new(rhs),
            domain,
        }
    }

    pub fn rhs(&self, x: f64, r: f64) -> f64 {
        (self.rhs)(x, r)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }
}

/// Mixed error criterion `err ≤ abs + rel·|state|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs > 0.0 && rel > 0.0 && abs.is_finite() && rel.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive, got abs = {abs}, rel = {rel}"
            )));
        }
        Ok(Self { abs, rel })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub tol: Tolerance,
    /// `r` below this raises `AmplitudeCollapse`; `None` disables the check.
    pub amplitude_floor: Option<f64>,
    pub blowup: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl IntegratorOptions {
    pub fn new(tol: Tolerance) -> Self {
        Self {
            tol,
            amplitude_floor: Some(1e-6),
            blowup: 1e12,
            max_steps: 1_000_000,
            initial_step: None,
        }
    }
}

/// One accepted step: endpoint values `(r, r', r'')` on `[x0, x1]`, `x0 < x1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    x0: f64,
    x1: f64,
    left: [f64; 3],
    right: [f64; 3],
}

impl Segment {
    fn eval(&self, x: f64) -> (f64, f64) {
        if x == self.x0 {
            return (self.left[0], self.left[1]);
        }
        if x == self.x1 {
            return (self.right[0], self.right[1]);
        }
        let h = self.x1 - self.x0;
        let t = (x - self.x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let [r0, p0, a0] = self.left;
        let [r1, p1, a1] = self.right;

        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        let h3 = 0.5 * t3 - t4 + 0.5 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let value = r0 * h0 + h * p0 * h1 + h * h * (a0 * h2 + a1 * h3) + h * p1 * h4 + r1 * h5;

        let d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let d2 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
        let d3 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
        let d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let slope = (r0 * d0 + r1 * (-d0)) / h + p0 * d1 + h * (a0 * d2 + a1 * d3) + p1 * d4;
        (value, slope)
    }
}

/// Piecewise quintic Hermite interpolant of an integrated solution; `C¹`
/// across step boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    segments: Vec<Segment>,
    rejected: usize,
}

impl DenseSolution {
    /// Closed interval `[start, end]` covered by the interpolant.
    pub fn span(&self) -> (f64, f64) {
        (self.segments[0].x0, self.segments[self.segments.len() - 1].x1)
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Accepted step endpoints `(x, r, r')`, ascending in `x`.
    pub fn nodes(&self) -> Vec<(f64, f64, f64)> {
        let first = &self.segments[0];
        std::iter::once((first.x0, first.left[0], first.left[1]))
            .chain(self.segments.iter().map(|s| (s.x1, s.right[0], s.right[1])))
            .collect()
    }

    /// `(r(x), r'(x))`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.span();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        let i = self.segments.partition_point(|s| s.x1 < x);
        Ok(self.segments[i.min(self.segments.len() - 1)].eval(x))
    }

    fn join(backward: DenseSolution, forward: DenseSolution) -> DenseSolution {
        let rejected = backward.rejected + forward.rejected;
        let mut segments = backward.segments;
        segments.extend(forward.segments);
        DenseSolution { segments, rejected }
    }
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 2];

/// Integrates from `x0` to `x_end` (either direction) with default options.
pub fn integrate(
    ode: &SecondOrderOde,
    x0: f64,
    r0: f64,
    rp0: f64,
    x_end: f64,
    tol: Tolerance,
) -> Result<DenseSolution> {
    integrate_with(ode, x0, r0, rp0, x_end, &IntegratorOptions::new(tol))
}

pub fn integrate_with(
    ode: &SecondOrderOde,
    x0: f64,
    r0: f64,
    rp0: f64,
    x_end: f64,
    opts: &IntegratorOptions,
) -> Result<DenseSolution> {
    let domain = ode.domain();
    for x in [x0, x_end] {
        if !domain.contains(x) {
            return Err(Error::Domain(format!(
                "x = {x} outside the equation's domain {domain}"
            )));
        }
    }
    if !(r0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial amplitude must be positive, got {r0}"
        )));
    }
    if !rp0.is_finite() {
        return Err(Error::InvalidParameter(format!("initial slope {rp0} is not finite")));
    }
    if x0 == x_end {
        return Err(Error::InvalidParameter("empty integration interval".into()));
    }
    Tolerance::new(opts.tol.abs, opts.tol.rel)?;

    let f = |x: f64, y: &State| -> State { [y[1], ode.rhs(x, y[0])] };
    let dir = (x_end - x0).signum();
    let span = (x_end - x0).abs();
    let scale = |y: &State, z: &State, i: usize| opts.tol.abs + opts.tol.rel * y[i].abs().max(z[i].abs());

    let mut x = x0;
    let mut y: State = [r0, rp0];
    let mut k1 = f(x, &y);
    if !(k1[1].is_finite()) {
        return Err(Error::NonFinite { x });
    }
    let mut h = opts
        .initial_step
        .map(f64::abs)
        .unwrap_or_else(|| initial_step(&f, x, &y, &k1, dir, span, opts));
    let mut segments = Vec::new();
    let mut rejected = 0usize;

    while (x_end - x) * dir > 0.0 {
        if segments.len() >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        if h < 1e-14 * x.abs() || h < 1e-300 {
            return Err(Error::StepSizeUnderflow { x, step: h });
        }
        let last = h >= (x_end - x).abs();
        let step = if last { x_end - x } else { dir * h };

        let mut k = [[0.0; 2]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..2 {
                    ys[i] += step * A[s][j] * kj[i];
                }
            }
            k[s] = f(x + C[s] * step, &ys);
        }
        let mut y_new = y;
        let mut err_vec = [0.0; 2];
        for i in 0..2 {
            for s in 0..6 {
                y_new[i] += step * A[6][s] * k[s][i];
            }
            for s in 0..7 {
                err_vec[i] += step * E[s] * k[s][i];
            }
        }
        let finite = y_new.iter().chain(err_vec.iter()).all(|v| v.is_finite());
        let err = if finite {
            (0.5 * ((err_vec[0] / scale(&y, &y_new, 0)).powi(2) + (err_vec[1] / scale(&y, &y_new, 1)).powi(2)))
                .sqrt()
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            let x_new = if last { x_end } else { x + step };
            // FSAL: stage 7 is f at the new point
            let k_new = k[6];
            let (left, right) = ([y[0], y[1], k1[1]], [y_new[0], y_new[1], k_new[1]]);
            segments.push(if dir > 0.0 {
                Segment { x0: x, x1: x_new, left, right }
            } else {
                Segment { x0: x_new, x1: x, left: right, right: left }
            });
            x = x_new;
            y = y_new;
            k1 = k_new;
            if y[0].abs() > opts.blowup || y[1].abs() > opts.blowup {
                return Err(Error::BlowUp { x, limit: opts.blowup });
            }
            if let Some(floor) = opts.amplitude_floor {
                if y[0] < floor {
                    return Err(Error::AmplitudeCollapse { x, r: y[0], floor });
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step.abs() * factor;
        } else {
            rejected += 1;
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.25 };
            h = step.abs() * factor;
        }
    }
    if dir < 0.0 {
        segments.reverse();
    }
    Ok(DenseSolution { segments, rejected })
}

fn initial_step(
    f: &dyn Fn(f64, &State) -> State,
    x: f64,
    y: &State,
    k1: &State,
    dir: f64,
    span: f64,
    opts: &IntegratorOptions,
) -> f64 {
    let sc = |i: usize| opts.tol.abs + opts.tol.rel * y[i].abs();
    let norm = |v: &State| ((v[0] / sc(0)).powi(2) + (v[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = [y[0] + dir * h0 * k1[0], y[1] + dir * h0 * k1[1]];
    let k2 = f(x + dir * h0, &y1);
    let d2 = norm(&[(k2[0] - k1[0]) / h0, (k2[1] - k1[1]) / h0]);
    let h1 = if !d2.is_finite() {
        h0
    } else if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates from `x0` in both directions so the result covers `[lo, hi]`.
pub fn integrate_span(
    ode: &SecondOrderOde,
    x0: f64,
    r0: f64,
    rp0: f64,
    lo: f64,
    hi: f64,
    opts: &IntegratorOptions,
) -> Result<DenseSolution> {
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty span [{lo}, {hi}]")));
    }
    let backward = (lo < x0).then(|| integrate_with(ode, x0, r0, rp0, lo, opts)).transpose()?;
    let forward = (hi > x0).then(|| integrate_with(ode, x0, r0, rp0, hi, opts)).transpose()?;
    match (backward, forward) {
        (Some(b), Some(f)) => Ok(DenseSolution::join(b, f)),
        (Some(b), None) => Ok(b),
        (None, Some(f)) => Ok(f),
        (None, None) => Err(Error::InvalidParameter(format!(
            "x0 = {x0} leaves nothing to integrate on [{lo}, {hi}]"
        ))),
    }
}

/// A positive amplitude `r(x)` with slope, evaluable on a known interval.
pub trait Amplitude: Send + Sync {
    /// Interval `(lo, hi)` of admissible arguments; see [`Amplitude::covers`].
    fn bounds(&self) -> (f64, f64);

    fn covers(&self, x: f64) -> bool {
        let (lo, hi) = self.bounds();
        x >= lo && x <= hi
    }

    /// `(r(x), r'(x))`.
    fn eval(&self, x: f64) -> Result<(f64, f64)>;
}

impl<T: Amplitude + ?Sized> Amplitude for &T {
    fn bounds(&self) -> (f64, f64) {
        (**self).bounds()
    }

    fn covers(&self, x: f64) -> bool {
        (**self).covers(x)
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        (**self).eval(x)
    }
}

impl<T: Amplitude + ?Sized> Amplitude for Box<T> {
    fn bounds(&self) -> (f64, f64) {
        (**self).bounds()
    }

    fn covers(&self, x: f64) -> bool {
        (**self).covers(x)
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        (**self).eval(x)
    }
}

impl Amplitude for DenseSolution {
    fn bounds(&self) -> (f64, f64) {
        self.span()
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        DenseSolution::eval(self, x)
    }
}

/// Where a sampled solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Integrated,
    Transformed,
    Resampled,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMeta {
    pub source: Provenance,
    pub params: BTreeMap<String, f64>,
    /// Sub-interval kept after trimming points whose image left the seed
    /// domain.
    pub trimmed_to: Option<(f64, f64)>,
}

impl GridMeta {
    pub fn new(source: Provenance) -> Self {
        Self {
            source,
            params: BTreeMap::new(),
            trimmed_to: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// Samples `(x, r(x), r'(x))` on a strictly increasing grid with `r > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    xs: Vec<f64>,
    rs: Vec<f64>,
    rps: Vec<f64>,
    pub meta: GridMeta,
}

impl SolutionGrid {
    pub fn new(xs: Vec<f64>, rs: Vec<f64>, rps: Vec<f64>, meta: GridMeta) -> Result<Self> {
        if xs.len() != rs.len() || xs.len() != rps.len() {
            return Err(Error::InvalidGrid(format!(
                "column lengths differ: {} / {} / {}",
                xs.len(),
                rs.len(),
                rps.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("x values must be strictly increasing".into()));
        }
        if let Some(i) = (0..xs.len()).find(|&i| !(xs[i].is_finite() && rs[i].is_finite() && rps[i].is_finite())) {
            return Err(Error::InvalidGrid(format!("non-finite sample at index {i}")));
        }
        if let Some(i) = rs.iter().position(|&r| r <= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "amplitude must be positive, r = {} at x = {}",
                rs[i], xs[i]
            )));
        }
        Ok(Self { xs, rs, rps, meta })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn rs(&self) -> &[f64] {
        &self.rs
    }

    pub fn rps(&self) -> &[f64] {
        &self.rps
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn is_uniform(&self) -> bool {
        if self.xs.len() < 2 {
            return true;
        }
        let h = (self.xs[self.xs.len() - 1] - self.xs[0]) / (self.xs.len() - 1) as f64;
        self.xs.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
    }

    /// Cubic Hermite resampling onto a uniform grid with the same number of
    /// points and end points.
    pub fn resample_uniform(&self) -> Result<SolutionGrid> {
        let n = self.xs.len();
        if n < 2 {
            return Ok(self.clone());
        }
        let xs = linspace(self.xs[0], self.xs[n - 1], n);
        let mut rs = Vec::with_capacity(n);
        let mut rps = Vec::with_capacity(n);
        for &x in &xs {
            let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
            let (xa, xb) = (self.xs[i - 1], self.xs[i]);
            let h = xb - xa;
            let t = (x - xa) / h;
            let (ra, rb, pa, pb) = (self.rs[i - 1], self.rs[i], self.rps[i - 1], self.rps[i]);
            let (t2, t3) = (t * t, t * t * t);
            rs.push(
                (2.0 * t3 - 3.0 * t2 + 1.0) * ra
                    + (t3 - 2.0 * t2 + t) * h * pa
                    + (-2.0 * t3 + 3.0 * t2) * rb
                    + (t3 - t2) * h * pb,
            );
            rps.push(
                (6.0 * t2 - 6.0 * t) / h * ra
                    + (3.0 * t2 - 4.0 * t + 1.0) * pa
                    + (-6.0 * t2 + 6.0 * t) / h * rb
                    + (3.0 * t2 - 2.0 * t) * pb,
            );
        }
        let mut meta = self.meta.clone();
        meta.source = Provenance::Resampled;
        SolutionGrid::new(xs, rs, rps, meta)
    }
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + i as f64 * h })
                .collect()
        }
    }
}

/// Interpolates a dense solution at `xs` (strictly increasing).
pub fn sample(dense: &DenseSolution, xs: &[f64]) -> Result<SolutionGrid> {
    let mut rs = Vec::with_capacity(xs.len());
    let mut rps = Vec::with_capacity(xs.len());
    for &x in xs {
        let (r, rp) = dense.eval(x)?;
        rs.push(r);
        rps.push(rp);
    }
    SolutionGrid::new(xs.to_vec(), rs, rps, GridMeta::new(Provenance::Integrated))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidualOptions {
    pub resample: bool,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self { resample: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub xs: Vec<f64>,
    /// `r''_FD(xᵢ) - rhs(xᵢ, rᵢ)` at every grid point.
    pub values: Vec<f64>,
    /// Max-abs over points with a centred stencil (all but two at each end).
    pub max_interior: f64,
    pub max_all: f64,
}

pub const MIN_RESIDUAL_POINTS: usize = 7;

pub fn residual(ode: &SecondOrderOde, grid: &SolutionGrid) -> Result<ResidualReport> {
    residual_with(ode, grid, ResidualOptions::default())
}

/// Fourth-order finite-difference residual: 5-point centred second
/// difference inside, 6-point one-sided stencils at the two points nearest
/// each end.
pub fn residual_with(ode: &SecondOrderOde, grid: &SolutionGrid, opts: ResidualOptions) -> Result<ResidualReport> {
    let n = grid.len();
    if n < MIN_RESIDUAL_POINTS {
        return Err(Error::GridTooSmall {
            points: n,
            required: MIN_RESIDUAL_POINTS,
        });
    }
    let resampled;
    let grid = if grid.is_uniform() {
        grid
    } else if opts.resample {
        resampled = grid.resample_uniform()?;
        &resampled
    } else {
        return Err(Error::NonUniform);
    };
    let xs = grid.xs();
    let rs = grid.rs();
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;

    let nodes: Vec<f64> = (0..6).map(|k| k as f64).collect();
    let edge = [fornberg_weights(0.0, &nodes, 2), fornberg_weights(1.0, &nodes, 2)];
    let centre = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

    let second = |i: usize| -> f64 {
        let dot = |w: &[f64], start: usize| w.iter().zip(&rs[start..]).map(|(a, b)| a * b).sum::<f64>();
        let raw = if i < 2 {
            dot(&edge[i], 0)
        } else if i >= n - 2 {
            // mirror of the left-edge stencil
            let off = n - 1 - i;
            let w: Vec<f64> = edge[off].iter().rev().copied().collect();
            dot(&w, n - 6)
        } else {
            dot(&centre, i - 2)
        };
        raw / (h * h)
    };

    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let v = second(i) - ode.rhs(xs[i], rs[i]);
        if !v.is_finite() {
            return Err(Error::NonFinite { x: xs[i] });
        }
        values.push(v);
    }
    let max_interior = values[2..n - 2].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_all = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ResidualReport {
        xs: xs.to_vec(),
        values,
        max_interior,
        max_all,
    })
}
