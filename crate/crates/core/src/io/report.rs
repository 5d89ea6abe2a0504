//! The run report: everything one re-ranking run decided and measured, in a
//! single JSON document with a fixed field order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_error, read_to_string, write_atomic, IoError};
use crate::metrics::{AccuracyReport, DiffEntry};
use crate::model::Config;
use crate::rerank::ConversationDecision;

/// Decisions, optional accuracy summaries (present only when the case is
/// labeled), the baseline-vs-reranked diffs, and the config that produced
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case_id: String,
    pub config: Config,
    pub baseline: Option<AccuracyReport>,
    pub reranked: Option<AccuracyReport>,
    pub decisions: Vec<ConversationDecision>,
    pub diffs: Vec<DiffEntry>,
}

/// Serializes the report. Field order is the struct order above; all nested
/// collections are either ordered by construction or sorted maps, so the
/// output is byte-stable.
pub fn report_to_json(report: &CaseReport) -> String {
    let mut out =
        serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    out.push('\n');
    out
}

/// Writes the report atomically.
pub fn write_report(report: &CaseReport, path: impl AsRef<Path>) -> Result<(), IoError> {
    write_atomic(path.as_ref(), &report_to_json(report))
}

/// Reads a report back; used for round-trip checks and downstream tooling.
pub fn load_report(path: impl AsRef<Path>) -> Result<CaseReport, IoError> {
    let path = path.as_ref();
    let content = read_to_string(path)?;
    serde_json::from_str(&content).map_err(|e| parse_error(path, &content, &e))
}
