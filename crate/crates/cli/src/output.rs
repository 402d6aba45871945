//! Trace CSV files and atomic file writes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use pss_core::SimulationTrace;
use tempfile::NamedTempFile;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`, so
/// a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    let err = |source| OutputError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

/// CSV text of a trace. `f64` display is the shortest decimal that parses
/// back to the same value, so the file is lossless.
pub fn trace_csv(trace: &SimulationTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 200);
    out.push_str(&SimulationTrace::COLUMNS.join(","));
    out.push('\n');
    for i in 0..trace.len() {
        let row = trace.row(i);
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, trace: &SimulationTrace) -> Result<(), OutputError> {
    write_atomic(path, trace_csv(trace).as_bytes())
}

pub fn read_trace(path: &Path) -> Result<SimulationTrace, OutputError> {
    let text = fs::read_to_string(path).map_err(|source| OutputError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_trace(&text).map_err(|reason| OutputError::Malformed {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn parse_trace(text: &str) -> Result<SimulationTrace, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(SimulationTrace::COLUMNS) {
        return Err(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        ));
    }
    let mut trace = SimulationTrace::default();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let mut row = [0.0; 10];
        for (slot, field) in row.iter_mut().zip(record.iter()) {
            *slot = field
                .parse()
                .map_err(|_| format!("row {}: bad number {field:?}", i + 1))?;
        }
        trace.push_row(row);
    }
    Ok(trace)
}

/// Path for generator `j` of a multi-generator run: `out.csv` becomes
/// `out.g1.csv`. Single-generator runs use `path` unchanged.
pub fn generator_path(path: &Path, j: usize, count: usize) -> PathBuf {
    if count <= 1 {
        return path.to_path_buf();
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.g{j}.{}", ext.to_string_lossy()),
        None => format!("{stem}.g{j}"),
    };
    path.with_file_name(name)
}
