//! File formats: case manifests in, reports and graph exports out.
//!
//! Everything here is JSON (plus Graphviz dot for graph export) with
//! deterministic field and key ordering, so identical inputs always produce
//! byte-identical files — golden tests rely on that. Reads are tolerant:
//! unknown fields are collected as warnings, not errors. Writes are atomic:
//! content goes to a temporary file which is renamed into place, so a failed
//! run never leaves a partial output.

mod graph_export;
mod manifest;
mod report;

pub use graph_export::{
    export_graph, graph_to_adjacency_json, graph_to_dot, import_graph_json, GraphFormat,
};
pub use manifest::{case_to_json, load_case, load_case_with_warnings, write_case};
pub use report::{load_report, report_to_json, write_report, CaseReport};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("failed to read {path}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("failed to write {path}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: parse error at line {line}, column {column} (byte {offset}): {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        offset: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    InvalidData { path: PathBuf, message: String },
    #[error("{path}: case failed validation:\n{report}")]
    InvalidCase {
        path: PathBuf,
        report: ValidationReport,
    },
    #[error("unknown graph format `{0}` (expected `dot` or `adjacency-json`)")]
    UnknownFormat(String),
}

/// Byte offset of a 1-based (line, column) position within `content`.
/// Saturates at the content length for out-of-range positions.
pub(crate) fn byte_offset(content: &str, line: usize, column: usize) -> usize {
    let mut offset = 0usize;
    for (i, text) in content.split('\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(content.len());
        }
        offset += text.len() + 1;
    }
    content.len()
}

pub(crate) fn parse_error(path: &Path, content: &str, err: &serde_json::Error) -> IoError {
    IoError::Parse {
        path: path.to_path_buf(),
        line: err.line(),
        column: err.column(),
        offset: byte_offset(content, err.line(), err.column()),
        message: err.to_string(),
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `contents` to `path` atomically: a sibling temporary file is
/// written and fsynced, then renamed over the target.
pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    use std::io::Write;
    let io_err = |source: std::io::Error| IoError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(parent) if parent != Path::new("") => parent,
        _ => Path::new("."),
    };
    let mut file = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    file.write_all(contents.as_bytes()).map_err(io_err)?;
    file.as_file().sync_all().map_err(io_err)?;
    file.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
