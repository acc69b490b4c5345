//! CSV and JSON output. Floats are written as `{:.16e}`, which round-trips
//! every `f64` exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::gp::WaveSample;
use crate::ode::{GridMeta, Provenance, SolutionGrid};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, IoError> {
    csv::Writer::from_path(path).map_err(|source| IoError::Csv {
        path: path.display().to_string(),
        source,
    })
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let wrap = |source| IoError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// Columns `x,r,r_prime`.
pub fn write_solution_csv(path: &Path, grid: &SolutionGrid) -> Result<(), IoError> {
    let rows = (0..grid.len()).map(|i| vec![fmt(grid.xs()[i]), fmt(grid.rs()[i]), fmt(grid.rps()[i])]);
    write_rows(path, &["x", "r", "r_prime"], rows)
}

/// Reads a file written by [`write_solution_csv`]. The grid is tagged as
/// external data.
pub fn read_solution_csv(path: &Path) -> Result<SolutionGrid, IoError> {
    let name = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|source| IoError::Csv {
        path: name.clone(),
        source,
    })?;
    let header = reader
        .headers()
        .map_err(|source| IoError::Csv { path: name.clone(), source })?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["x", "r", "r_prime"] {
        return Err(IoError::Format {
            path: name,
            message: "expected header x,r,r_prime".into(),
        });
    }
    let (mut xs, mut rs, mut rps) = (Vec::new(), Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|source| IoError::Csv { path: name.clone(), source })?;
        let parse = |i: usize| -> Result<f64, IoError> {
            record.get(i).and_then(|s| s.trim().parse().ok()).ok_or_else(|| IoError::Format {
                path: name.clone(),
                message: format!("row {}: bad column {}", line + 1, i + 1),
            })
        };
        xs.push(parse(0)?);
        rs.push(parse(1)?);
        rps.push(parse(2)?);
    }
    SolutionGrid::new(xs, rs, rps, GridMeta::new(Provenance::External)).map_err(|e| IoError::Format {
        path: name,
        message: e.to_string(),
    })
}

/// Columns `x,t,re,im,modulus`.
pub fn write_wave_csv(path: &Path, samples: &[WaveSample]) -> Result<(), IoError> {
    let rows = samples
        .iter()
        .map(|s| vec![fmt(s.x), fmt(s.t), fmt(s.re), fmt(s.im), fmt(s.modulus())]);
    write_rows(path, &["x", "t", "re", "im", "modulus"], rows)
}

/// Pretty-printed JSON with a trailing newline. Field order follows the
/// struct declarations, so output is byte-stable.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let name = path.display().to_string();
    let file = File::create(path).map_err(|source| IoError::File { path: name.clone(), source })?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| IoError::Json { path: name.clone(), source })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|source| IoError::File { path: name, source })
}
