//! Config-driven runs behind the `gpbt` binary. Each run writes its files
//! under an output directory and returns the report it wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::backlund::{is_fixed_point, orbit, BacklundMap};
use crate::config::{ConfigError, ExperimentConfig, SeedSpec};
use crate::error::{Error, Result};
use crate::functional::ShiftMap;
use crate::gp::{gp_rhs, wave_lattice, ClosedForm, WaveSource};
use crate::io::{write_json, write_solution_csv, write_wave_csv, IoError};
use crate::ode::{integrate_span, linspace, residual, Amplitude, DenseSolution, IntegratorOptions, SolutionGrid, Tolerance};
use crate::verify::{Check, Suite};

pub const FIXED_POINT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure in {stage}: {}: {source}", source.kind())]
    Numerical { stage: String, source: Error },
    #[error("output error: {0}")]
    Output(#[from] IoError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Output(_) => 1,
        }
    }

    fn numerical(stage: &str) -> impl FnOnce(Error) -> RunError + '_ {
        move |source| RunError::Numerical {
            stage: stage.to_string(),
            source,
        }
    }
}

/// The seed amplitude named by the configuration.
#[derive(Debug, Clone)]
pub enum Seed {
    ClosedForm(ClosedForm),
    Integrated(DenseSolution),
}

impl Amplitude for Seed {
    fn bounds(&self) -> (f64, f64) {
        match self {
            Seed::ClosedForm(c) => c.bounds(),
            Seed::Integrated(d) => d.bounds(),
        }
    }

    fn covers(&self, x: f64) -> bool {
        match self {
            Seed::ClosedForm(c) => c.covers(x),
            Seed::Integrated(d) => d.covers(x),
        }
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        match self {
            Seed::ClosedForm(c) => c.eval(x),
            Seed::Integrated(d) => d.eval(x),
        }
    }
}

/// Builds the seed; an integrated seed covers `[lo, hi]` and its initial
/// point.
pub fn build_seed(cfg: &ExperimentConfig, lo: f64, hi: f64) -> std::result::Result<Seed, RunError> {
    match cfg.seed {
        SeedSpec::ClosedForm => ClosedForm::new(cfg.params).map(Seed::ClosedForm).map_err(|e| {
            ConfigError::Invalid(format!("closed-form seed needs b v^6 + c^2 = 0: {e}")).into()
        }),
        SeedSpec::Integrate { x0, r0, rp0 } => {
            let stage = RunError::numerical("seed integration");
            let tol = Tolerance::new(cfg.tolerances.ode_abs, cfg.tolerances.ode_rel)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            let ode = gp_rhs(&cfg.params).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            integrate_span(&ode, x0, r0, rp0, lo.min(x0), hi.max(x0), &IntegratorOptions::new(tol))
                .map(Seed::Integrated)
                .map_err(stage)
        }
    }
}

/// Samples an amplitude on `xs` into a grid.
pub fn sample_amplitude(seed: &dyn Amplitude, xs: &[f64], meta: crate::ode::GridMeta) -> Result<SolutionGrid> {
    let mut rs = Vec::with_capacity(xs.len());
    let mut rps = Vec::with_capacity(xs.len());
    for &x in xs {
        let (r, rp) = seed.eval(x)?;
        rs.push(r);
        rps.push(rp);
    }
    SolutionGrid::new(xs.to_vec(), rs, rps, meta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Element {
    pub index: usize,
    pub k: f64,
    pub csv: String,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trimmed_to: Option<(f64, f64)>,
    pub residual_max: f64,
    pub fixed_point: bool,
    pub fixed_point_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<Element>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    pub params: ExperimentConfig,
}

impl Report {
    fn new(command: &str, cfg: &ExperimentConfig) -> Self {
        Self {
            command: command.into(),
            checks: Vec::new(),
            elements: Vec::new(),
            failure: None,
            params: cfg.clone(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.failure.is_none() && self.checks.iter().all(|c| c.pass)
    }
}

fn out_path(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(name)
}

fn ensure_dir(dir: &Path) -> std::result::Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(|source| {
        IoError::File {
            path: dir.display().to_string(),
            source,
        }
        .into()
    })
}

fn grid_xs(cfg: &ExperimentConfig) -> Vec<f64> {
    linspace(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.points)
}

fn residual_check(cfg: &ExperimentConfig, name: &str, grid: &SolutionGrid) -> Result<Check> {
    let ode = gp_rhs(&cfg.params)?;
    Ok(Check::below(name, residual(&ode, grid)?.max_interior, cfg.tolerances.residual_pass))
}

/// Samples the seed on the configured grid and writes the solution CSV and
/// a report with the finite-difference residual.
pub fn run_solve(cfg: &ExperimentConfig, out_dir: &Path) -> std::result::Result<Report, RunError> {
    ensure_dir(out_dir)?;
    let xs = grid_xs(cfg);
    let seed = build_seed(cfg, cfg.grid.x_min, cfg.grid.x_max)?;
    let mut meta = cfg.params.snapshot();
    meta.source = match seed {
        Seed::ClosedForm(_) => crate::ode::Provenance::ClosedForm,
        Seed::Integrated(_) => crate::ode::Provenance::Integrated,
    };
    let grid = sample_amplitude(&seed, &xs, meta).map_err(RunError::numerical("sampling"))?;
    let check = residual_check(cfg, "residual", &grid).map_err(RunError::numerical("residual"))?;
    write_solution_csv(&out_path(out_dir, &cfg.outputs.solution_csv), &grid)?;
    let mut report = Report::new("solve", cfg);
    report.checks.push(check);
    write_json(&out_path(out_dir, &cfg.outputs.report_json), &report)?;
    Ok(report)
}

/// Seed span covering the grid and its images under every cumulative shift.
fn transform_span(cfg: &ExperimentConfig) -> (f64, f64) {
    let (mut lo, mut hi) = (cfg.grid.x_min, cfg.grid.x_max);
    let g = cfg.params.poly();
    let mut total = 0.0;
    for &k in &cfg.k_schedule {
        total += k;
        let Ok(m) = ShiftMap::new(g, total) else { continue };
        for x in [cfg.grid.x_min, cfg.grid.x_max] {
            if let Ok(root) = m.solve(x) {
                lo = lo.min(root.f);
                hi = hi.max(root.f);
            }
        }
    }
    (lo, hi)
}

/// `<stem>_k{j}.<ext>` next to the configured solution CSV.
pub fn element_csv_name(solution_csv: &str, j: usize) -> String {
    let p = Path::new(solution_csv);
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("solution");
    let ext = p.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    let name = format!("{stem}_k{j}.{ext}");
    match p.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => dir.join(name).display().to_string(),
        None => name,
    }
}

/// Transforms the seed along the running sums of the schedule. Element `j`
/// (from 0) uses `K = k₀ + … + k_j` and goes to `<stem>_k{j}.csv`.
pub fn run_transform(cfg: &ExperimentConfig, out_dir: &Path) -> std::result::Result<Report, RunError> {
    if cfg.k_schedule.is_empty() {
        return Err(ConfigError::Invalid("k_schedule is empty; transform needs at least one shift".into()).into());
    }
    ensure_dir(out_dir)?;
    let (lo, hi) = transform_span(cfg);
    let seed = build_seed(cfg, lo, hi)?;
    let xs = grid_xs(cfg);
    let g = cfg.params.poly();
    let grids = orbit(g, &cfg.k_schedule, &seed, &xs).map_err(RunError::numerical("transform"))?;

    let mut report = Report::new("transform", cfg);
    let mut total = 0.0;
    for (j, (grid, &k)) in grids.iter().zip(&cfg.k_schedule).enumerate() {
        total += k;
        let stage = format!("transform element {j}");
        let check = residual_check(cfg, &format!("k{j}_residual"), grid)
            .map_err(|source| RunError::Numerical { stage: stage.clone(), source })?;
        let fixed = BacklundMap::from_poly(g, total, &seed)
            .and_then(|map| is_fixed_point(&map, &seed, grid.xs(), FIXED_POINT_TOL))
            .map_err(|source| RunError::Numerical { stage: stage.clone(), source })?;
        let csv = element_csv_name(&cfg.outputs.solution_csv, j);
        let path = out_path(out_dir, &csv);
        if let Some(dir) = path.parent() {
            ensure_dir(dir)?;
        }
        write_solution_csv(&path, grid)?;
        report.elements.push(Element {
            index: j,
            k: total,
            csv,
            points: grid.len(),
            trimmed_to: grid.meta.trimmed_to,
            residual_max: check.deviation,
            fixed_point: fixed.fixed,
            fixed_point_deviation: fixed.deviation,
        });
        report.checks.push(check);
    }
    write_json(&out_path(out_dir, &cfg.outputs.report_json), &report)?;
    Ok(report)
}

/// Runs the identity suite. On a numerical failure the checks completed so
/// far are still written, with the failure recorded.
pub fn run_verify(cfg: &ExperimentConfig, out_dir: &Path) -> std::result::Result<Report, RunError> {
    ensure_dir(out_dir)?;
    let suite = Suite {
        params: cfg.params,
        schedule: cfg.k_schedule.clone(),
        xs: grid_xs(cfg),
        tol: Tolerance::new(cfg.tolerances.ode_abs, cfg.tolerances.ode_rel)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?,
        residual_pass: cfg.tolerances.residual_pass,
    };
    let (checks, failure) = suite.run();
    let mut report = Report::new("verify", cfg);
    report.checks = checks;
    report.failure = failure.as_ref().map(|f| Failure {
        stage: f.check.clone(),
        message: format!("{}: {}", f.error.kind(), f.error),
    });
    write_json(&out_path(out_dir, &cfg.outputs.report_json), &report)?;
    match failure {
        Some(f) => Err(RunError::Numerical {
            stage: format!("verify check {}", f.check),
            source: f.error,
        }),
        None => Ok(report),
    }
}

/// Writes `ψ` over the grid and the given times. An integrated seed takes
/// its phase from quadrature anchored at the initial point.
pub fn run_wavefunction(cfg: &ExperimentConfig, out_dir: &Path, ts: &[f64]) -> std::result::Result<Report, RunError> {
    if ts.iter().any(|t| !t.is_finite()) {
        return Err(ConfigError::Invalid("time samples must be finite".into()).into());
    }
    ensure_dir(out_dir)?;
    let xs = grid_xs(cfg);
    let seed = build_seed(cfg, cfg.grid.x_min, cfg.grid.x_max)?;
    let source = match (&seed, cfg.seed) {
        (Seed::ClosedForm(c), _) => WaveSource::ClosedForm(c),
        (Seed::Integrated(d), SeedSpec::Integrate { x0, .. }) => WaveSource::Numerical { amplitude: d, x_ref: x0 },
        (Seed::Integrated(d), SeedSpec::ClosedForm) => WaveSource::Numerical {
            amplitude: d,
            x_ref: cfg.grid.x_min,
        },
    };
    let samples = wave_lattice(&cfg.params, source, &xs, ts).map_err(RunError::numerical("wave function"))?;
    let mut worst = 0.0f64;
    for s in &samples {
        let (r, _) = seed.eval(s.x).map_err(RunError::numerical("wave function"))?;
        worst = worst.max((s.modulus() - r).abs() / r.max(1.0));
    }
    write_wave_csv(&out_path(out_dir, &cfg.outputs.wave_csv), &samples)?;
    let mut report = Report::new("wavefunction", cfg);
    report.checks.push(Check::below("modulus_equals_amplitude", worst, 1e-12));
    write_json(&out_path(out_dir, &cfg.outputs.report_json), &report)?;
    Ok(report)
}
