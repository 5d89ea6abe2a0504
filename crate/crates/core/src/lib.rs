//! Conversation-aware re-ranking for multi-speaker identification.
//!
//! An external acoustic backend scores every enrolled speaker against every
//! utterance of a conversation; taken alone, the per-utterance argmax ignores
//! who tends to talk with whom. This crate keeps a weighted interaction graph
//! of past conversations and re-ranks each conversation's candidate
//! assignments jointly: a combination of speakers earns a boost when its
//! members are central in the graph and have interacted with each other
//! before. Decisions feed the graph, so knowledge accumulates as a case
//! progresses.
//!
//! The pipeline per conversation:
//!
//! 1. min-max normalize each utterance's raw scores ([`rerank::normalize_scores`]),
//! 2. prune candidates by relative threshold and `top_k` ([`rerank::prune_candidates`]),
//! 3. enumerate assignments, score each against a snapshot of the graph, keep
//!    the argmax ([`rerank::enumerate_and_select`]),
//! 4. record the chosen speaker set back into the graph
//!    ([`graph::InteractionGraph::record_conversation`]).
//!
//! [`rerank::process_case`] runs the whole loop; [`metrics`] compares baseline
//! and re-ranked decisions; [`synth`] generates community-structured synthetic
//! cases for experiments; [`io`] reads case manifests and writes reports and
//! graph exports.
//!
//! With the default `parallel` feature, large enumerations are scored on a
//! rayon thread pool; results are bitwise identical to the sequential path.

pub mod graph;
pub mod io;
pub mod metrics;
pub mod model;
pub mod rerank;
pub mod synth;

pub use graph::{GraphError, GraphSnapshot, InteractionGraph};
pub use metrics::{AccuracyReport, DiffEntry, MetricsError, Side};
pub use model::{
    validate_case, Case, CandidateScore, Config, Conversation, ModelError, SpeakerId, Utterance,
    ValidationReport, Violation,
};
pub use rerank::{
    enumerate_and_select, process_case, CaseOutcome, Combination, ConversationDecision,
    RerankError,
};
pub use synth::{generate_case, topology_drift, SynthError, SynthSpec};
