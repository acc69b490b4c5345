//! Experiment configuration: flat `dotted.key = value` text, one entry per
//! line, `#` comments.
//!
//! ```text
//! params.n = 1
//! params.eta = 1.0
//! grid.points = 2001
//! k_schedule = 0.5, 0.5
//! seed.kind = integrate
//! seed.r0 = 0.7
//! ```
//!
//! Missing keys keep their defaults; unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::gp::GpParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedSpec {
    ClosedForm,
    Integrate { x0: f64, r0: f64, rp0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub ode_abs: f64,
    pub ode_rel: f64,
    pub residual_pass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outputs {
    pub solution_csv: String,
    pub wave_csv: String,
    pub report_json: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub params: GpParams,
    pub grid: GridSpec,
    pub k_schedule: Vec<f64>,
    pub seed: SeedSpec,
    pub tolerances: Tolerances,
    pub outputs: Outputs,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: GpParams::default(),
            grid: GridSpec {
                x_min: 1.0,
                x_max: 2.0,
                points: 2001,
            },
            k_schedule: vec![0.5],
            seed: SeedSpec::ClosedForm,
            tolerances: Tolerances {
                ode_abs: 1e-10,
                ode_rel: 1e-10,
                residual_pass: 1e-5,
            },
            outputs: Outputs {
                solution_csv: "solution.csv".into(),
                wave_csv: "wave.csv".into(),
                report_json: "report.json".into(),
            },
        }
    }
}

const SEED_DEFAULTS: (f64, f64, f64) = (1.0, 1.0, 0.0);

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seed_kind: Option<String> = None;
        let (mut x0, mut r0, mut rp0) = SEED_DEFAULTS;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |message: String| ConfigError::Value {
                line,
                key: key.to_string(),
                message,
            };
            let real = || value.parse::<f64>().map_err(|e| bad(format!("`{value}`: {e}")));
            let count = || value.parse::<usize>().map_err(|e| bad(format!("`{value}`: {e}")));

            match key {
                "params.n" => {
                    cfg.params.n = value.parse::<u32>().map_err(|e| bad(format!("`{value}`: {e}")))?
                }
                "params.eta" => cfg.params.eta = real()?,
                "params.b" => cfg.params.b = real()?,
                "params.c" => cfg.params.c = real()?,
                "params.v" => cfg.params.v = real()?,
                "params.mu" => cfg.params.mu = real()?,
                "params.theta0" => cfg.params.theta0 = real()?,
                "grid.x_min" => cfg.grid.x_min = real()?,
                "grid.x_max" => cfg.grid.x_max = real()?,
                "grid.points" => cfg.grid.points = count()?,
                "k_schedule" => {
                    cfg.k_schedule = if value.is_empty() {
                        Vec::new()
                    } else {
                        value
                            .split(',')
                            .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}"))))
                            .collect::<Result<_, _>>()?
                    }
                }
                "seed.kind" => seed_kind = Some(value.to_string()),
                "seed.x0" => x0 = real()?,
                "seed.r0" => r0 = real()?,
                "seed.rp0" => rp0 = real()?,
                "tolerances.ode_abs" => cfg.tolerances.ode_abs = real()?,
                "tolerances.ode_rel" => cfg.tolerances.ode_rel = real()?,
                "tolerances.residual_pass" => cfg.tolerances.residual_pass = real()?,
                "outputs.solution_csv" => cfg.outputs.solution_csv = value.to_string(),
                "outputs.wave_csv" => cfg.outputs.wave_csv = value.to_string(),
                "outputs.report_json" => cfg.outputs.report_json = value.to_string(),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }

        cfg.seed = match seed_kind.as_deref() {
            None | Some("closed_form") => SeedSpec::ClosedForm,
            Some("integrate") => SeedSpec::Integrate { x0, r0, rp0 },
            Some(other) => {
                return Err(ConfigError::Invalid(format!(
                    "seed.kind must be `closed_form` or `integrate`, got `{other}`"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let g = &self.grid;
        if !(g.x_min > 0.0 && g.x_min < g.x_max && g.x_max.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "grid must satisfy 0 < x_min < x_max, got [{}, {}]",
                g.x_min, g.x_max
            )));
        }
        if g.points < 7 {
            return Err(ConfigError::Invalid(format!(
                "grid too small: {} points, need at least 7",
                g.points
            )));
        }
        let t = &self.tolerances;
        if !(t.ode_abs > 0.0 && t.ode_rel > 0.0 && t.residual_pass > 0.0) {
            return Err(ConfigError::Invalid("tolerances must be strictly positive".into()));
        }
        if self.k_schedule.iter().any(|k| !k.is_finite()) {
            return Err(ConfigError::Invalid("k_schedule entries must be finite".into()));
        }
        if let SeedSpec::Integrate { x0, r0, rp0 } = self.seed {
            if !(x0 > 0.0 && r0 > 0.0 && rp0.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "integrated seed needs x0 > 0 and r0 > 0, got x0 = {x0}, r0 = {r0}"
                )));
            }
        }
        Ok(())
    }

    /// Renders the configuration in the text format accepted by
    /// [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "params.n = {}", p.n);
        for (k, v) in [("eta", p.eta), ("b", p.b), ("c", p.c), ("v", p.v), ("mu", p.mu), ("theta0", p.theta0)] {
            let _ = writeln!(s, "params.{k} = {v:?}");
        }
        let _ = writeln!(s, "grid.x_min = {:?}", self.grid.x_min);
        let _ = writeln!(s, "grid.x_max = {:?}", self.grid.x_max);
        let _ = writeln!(s, "grid.points = {}", self.grid.points);
        let ks: Vec<String> = self.k_schedule.iter().map(|k| format!("{k:?}")).collect();
        let _ = writeln!(s, "k_schedule = {}", ks.join(", "));
        match self.seed {
            SeedSpec::ClosedForm => {
                let _ = writeln!(s, "seed.kind = closed_form");
            }
            SeedSpec::Integrate { x0, r0, rp0 } => {
                let _ = writeln!(s, "seed.kind = integrate");
                let _ = writeln!(s, "seed.x0 = {x0:?}\nseed.r0 = {r0:?}\nseed.rp0 = {rp0:?}");
            }
        }
        let t = &self.tolerances;
        let _ = writeln!(s, "tolerances.ode_abs = {:?}", t.ode_abs);
        let _ = writeln!(s, "tolerances.ode_rel = {:?}", t.ode_rel);
        let _ = writeln!(s, "tolerances.residual_pass = {:?}", t.residual_pass);
        let _ = writeln!(s, "outputs.solution_csv = {}", self.outputs.solution_csv);
        let _ = writeln!(s, "outputs.wave_csv = {}", self.outputs.wave_csv);
        let _ = writeln!(s, "outputs.report_json = {}", self.outputs.report_json);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn parses_all_sections() {
        let text = "\
# comment
params.n = 2
params.eta = 0.5   # trailing comment
params.b = -1
grid.x_min = 0.5
grid.x_max = 5
grid.points = 401
k_schedule = 0.25, 0.5,1
seed.kind = integrate
seed.x0 = 1.0
seed.r0 = 0.7
seed.rp0 = -0.1
tolerances.residual_pass = 1e-6
outputs.solution_csv = out/sol.csv
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.params.n, 2);
        assert_eq!(cfg.params.eta, 0.5);
        assert_eq!(cfg.grid.points, 401);
        assert_eq!(cfg.k_schedule, vec![0.25, 0.5, 1.0]);
        assert_eq!(cfg.seed, SeedSpec::Integrate { x0: 1.0, r0: 0.7, rp0: -0.1 });
        assert_eq!(cfg.tolerances.residual_pass, 1e-6);
        assert_eq!(cfg.outputs.solution_csv, "out/sol.csv");
    }

    #[test]
    fn empty_schedule() {
        assert!(ExperimentConfig::parse("k_schedule =").unwrap().k_schedule.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ExperimentConfig::parse("grid.points = 3"),
            Err(ConfigError::Invalid(m)) if m.contains("grid too small")
        ));
        assert!(matches!(ExperimentConfig::parse("foo = 1"), Err(ConfigError::UnknownKey { line: 1, .. })));
        assert!(matches!(ExperimentConfig::parse("params.n"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(ExperimentConfig::parse("params.eta = x"), Err(ConfigError::Value { .. })));
        assert!(ExperimentConfig::parse("grid.x_min = 0").is_err());
        assert!(ExperimentConfig::parse("tolerances.ode_abs = 0").is_err());
        assert!(ExperimentConfig::parse("seed.kind = magic").is_err());
        assert!(ExperimentConfig::parse("params.n = 0").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.params.eta = 0.1 + 0.2;
        cfg.k_schedule = vec![1.0 / 3.0, -0.25];
        cfg.seed = SeedSpec::Integrate { x0: 1.5, r0: 0.61, rp0: 1e-3 };
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
