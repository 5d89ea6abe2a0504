//! Domain types shared by every stage of the pipeline: speakers, scored
//! utterances, conversations, cases, and the tool configuration.
//!
//! All types are immutable after construction and safe to share across
//! threads. Structural validation lives in [`validate_case`]; violations are
//! reported as data, not errors, so callers can surface every problem at once.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

/// Errors raised while constructing or checking domain values.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("speaker id must be a non-empty string")]
    EmptySpeakerId,
    #[error("config: lambda must be finite and >= 0, got {0}")]
    InvalidLambda(f64),
    #[error("config: top_k must be >= 1")]
    InvalidTopK,
    #[error("config: rel_threshold must lie in [0, 1], got {0}")]
    InvalidRelThreshold(f64),
    #[error("config: max_combinations must be >= 1")]
    InvalidMaxCombinations,
}

/// Opaque identity of an enrolled speaker. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SpeakerId(String);

impl SpeakerId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        if id.is_empty() {
            return Err(ModelError::EmptySpeakerId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SpeakerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for SpeakerId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let id = String::deserialize(deserializer)?;
        SpeakerId::new(id).map_err(serde::de::Error::custom)
    }
}

/// One enrolled speaker's score against one utterance.
///
/// `raw_score` is whatever the acoustic backend produced (unbounded, often
/// negative). `norm_score` is filled by per-utterance min-max normalization
/// and lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub speaker: SpeakerId,
    pub raw_score: f64,
    pub norm_score: Option<f64>,
}

impl CandidateScore {
    pub fn new(speaker: SpeakerId, raw_score: f64) -> Self {
        Self {
            speaker,
            raw_score,
            norm_score: None,
        }
    }
}

/// One utterance slot: a candidate list (one entry per scored speaker) and an
/// optional ground-truth label. Truth is optional so the tool can run in pure
/// inference mode; metrics require it.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub utterance_id: String,
    pub candidates: Vec<CandidateScore>,
    pub truth: Option<SpeakerId>,
}

/// An ordered sequence of utterances spoken in one sitting. `index` is the
/// 0-based position of the conversation within its case.
#[derive(Debug, Clone, PartialEq)]
pub struct Conversation {
    pub conversation_id: String,
    pub index: usize,
    pub utterances: Vec<Utterance>,
}

impl Conversation {
    pub fn n_slots(&self) -> usize {
        self.utterances.len()
    }
}

/// A full case: the enrolled speaker set and its conversations, processed
/// strictly in list order.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub case_id: String,
    pub enrolled: BTreeSet<SpeakerId>,
    pub conversations: Vec<Conversation>,
}

impl Case {
    /// Builds a case, assigning each conversation's `index` from its position.
    pub fn new(
        case_id: impl Into<String>,
        enrolled: BTreeSet<SpeakerId>,
        conversations: Vec<Conversation>,
    ) -> Self {
        let conversations = conversations
            .into_iter()
            .enumerate()
            .map(|(index, conv)| Conversation { index, ..conv })
            .collect();
        Self {
            case_id: case_id.into(),
            enrolled,
            conversations,
        }
    }

    pub fn n_utterances(&self) -> usize {
        self.conversations.iter().map(Conversation::n_slots).sum()
    }

    /// True when every utterance carries a ground-truth label.
    pub fn fully_labeled(&self) -> bool {
        self.conversations
            .iter()
            .flat_map(|c| &c.utterances)
            .all(|u| u.truth.is_some())
    }
}

/// Tuning knobs for pruning and combination scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Weight of the pair-interaction product factor.
    pub lambda: f64,
    /// Keep at most this many candidates per utterance after thresholding.
    pub top_k: usize,
    /// Keep a candidate only if its normalized score is at least
    /// `rel_threshold` times the best normalized score in that utterance.
    pub rel_threshold: f64,
    /// Whether one speaker may be assigned to several slots of a conversation.
    pub allow_repeat_speakers: bool,
    /// Hard cap on the number of combinations enumerated per conversation.
    pub max_combinations: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            top_k: 5,
            rel_threshold: 0.5,
            allow_repeat_speakers: true,
            max_combinations: 100_000,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(ModelError::InvalidLambda(self.lambda));
        }
        if self.top_k == 0 {
            return Err(ModelError::InvalidTopK);
        }
        if !self.rel_threshold.is_finite() || !(0.0..=1.0).contains(&self.rel_threshold) {
            return Err(ModelError::InvalidRelThreshold(self.rel_threshold));
        }
        if self.max_combinations == 0 {
            return Err(ModelError::InvalidMaxCombinations);
        }
        Ok(())
    }
}

/// One structural problem found in a case, with coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A candidate references a speaker outside the enrolled set.
    NonEnrolledCandidate {
        conversation_id: String,
        utterance_id: String,
        speaker: SpeakerId,
    },
    /// A ground-truth label references a speaker outside the enrolled set.
    NonEnrolledTruth {
        conversation_id: String,
        utterance_id: String,
        speaker: SpeakerId,
    },
    /// The same speaker appears twice in one utterance's candidate list.
    DuplicateCandidate {
        conversation_id: String,
        utterance_id: String,
        speaker: SpeakerId,
    },
    /// An utterance has no candidates at all.
    EmptyCandidates {
        conversation_id: String,
        utterance_id: String,
    },
    /// A conversation has no utterances.
    NoUtterances { conversation_id: String },
    /// A conversation's stored index disagrees with its list position.
    IndexMismatch {
        conversation_id: String,
        expected: usize,
        found: usize,
    },
    /// A candidate raw score is NaN or infinite.
    NonFiniteScore {
        conversation_id: String,
        utterance_id: String,
        speaker: SpeakerId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonEnrolledCandidate {
                conversation_id,
                utterance_id,
                speaker,
            } => write!(
                f,
                "conversation {conversation_id}, utterance {utterance_id}: \
                 candidate {speaker} is not enrolled"
            ),
            Violation::NonEnrolledTruth {
                conversation_id,
                utterance_id,
                speaker,
            } => write!(
                f,
                "conversation {conversation_id}, utterance {utterance_id}: \
                 truth label {speaker} is not enrolled"
            ),
            Violation::DuplicateCandidate {
                conversation_id,
                utterance_id,
                speaker,
            } => write!(
                f,
                "conversation {conversation_id}, utterance {utterance_id}: \
                 duplicate candidate {speaker}"
            ),
            Violation::EmptyCandidates {
                conversation_id,
                utterance_id,
            } => write!(
                f,
                "conversation {conversation_id}, utterance {utterance_id}: no candidates"
            ),
            Violation::NoUtterances { conversation_id } => {
                write!(f, "conversation {conversation_id}: no utterances")
            }
            Violation::IndexMismatch {
                conversation_id,
                expected,
                found,
            } => write!(
                f,
                "conversation {conversation_id}: index {found} but list position {expected}"
            ),
            Violation::NonFiniteScore {
                conversation_id,
                utterance_id,
                speaker,
            } => write!(
                f,
                "conversation {conversation_id}, utterance {utterance_id}: \
                 non-finite raw score for {speaker}"
            ),
        }
    }
}

/// The outcome of [`validate_case`]: empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of a case and reports all violations
/// with conversation/utterance coordinates. Side-effect free and idempotent.
pub fn validate_case(case: &Case) -> ValidationReport {
    let mut violations = Vec::new();
    for (position, conv) in case.conversations.iter().enumerate() {
        if conv.index != position {
            violations.push(Violation::IndexMismatch {
                conversation_id: conv.conversation_id.clone(),
                expected: position,
                found: conv.index,
            });
        }
        if conv.utterances.is_empty() {
            violations.push(Violation::NoUtterances {
                conversation_id: conv.conversation_id.clone(),
            });
        }
        for utt in &conv.utterances {
            if utt.candidates.is_empty() {
                violations.push(Violation::EmptyCandidates {
                    conversation_id: conv.conversation_id.clone(),
                    utterance_id: utt.utterance_id.clone(),
                });
            }
            let mut seen = BTreeSet::new();
            for cand in &utt.candidates {
                if !case.enrolled.contains(&cand.speaker) {
                    violations.push(Violation::NonEnrolledCandidate {
                        conversation_id: conv.conversation_id.clone(),
                        utterance_id: utt.utterance_id.clone(),
                        speaker: cand.speaker.clone(),
                    });
                }
                if !seen.insert(&cand.speaker) {
                    violations.push(Violation::DuplicateCandidate {
                        conversation_id: conv.conversation_id.clone(),
                        utterance_id: utt.utterance_id.clone(),
                        speaker: cand.speaker.clone(),
                    });
                }
                if !cand.raw_score.is_finite() {
                    violations.push(Violation::NonFiniteScore {
                        conversation_id: conv.conversation_id.clone(),
                        utterance_id: utt.utterance_id.clone(),
                        speaker: cand.speaker.clone(),
                    });
                }
            }
            if let Some(truth) = &utt.truth {
                if !case.enrolled.contains(truth) {
                    violations.push(Violation::NonEnrolledTruth {
                        conversation_id: conv.conversation_id.clone(),
                        utterance_id: utt.utterance_id.clone(),
                        speaker: truth.clone(),
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}
