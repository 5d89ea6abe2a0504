//! The case manifest: the JSON document that carries an acoustic backend's
//! scores into the pipeline.
//!
//! ```json
//! {
//!   "case_id": "ep01",
//!   "enrolled": ["S0", "S1"],
//!   "conversations": [
//!     {
//!       "conversation_id": "c0",
//!       "utterances": [
//!         { "utterance_id": "u0", "truth": "S0", "scores": { "S0": 1.7, "S1": -0.4 } }
//!       ]
//!     }
//!   ]
//! }
//! ```
//!
//! `truth` is optional. Scores are keyed by speaker, so candidate lists load
//! in speaker order and serialize deterministically. Unknown fields anywhere
//! in the document are tolerated and reported as warnings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{parse_error, read_to_string, write_atomic, IoError};
use crate::model::{
    validate_case, Case, CandidateScore, Conversation, SpeakerId, Utterance,
};

#[derive(Serialize, Deserialize)]
struct ManifestDoc {
    case_id: String,
    enrolled: Vec<String>,
    conversations: Vec<ConversationDoc>,
    #[serde(flatten, skip_serializing_if = "BTreeMap::is_empty")]
    extra: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct ConversationDoc {
    conversation_id: String,
    utterances: Vec<UtteranceDoc>,
    #[serde(flatten, skip_serializing_if = "BTreeMap::is_empty")]
    extra: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct UtteranceDoc {
    utterance_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth: Option<String>,
    scores: BTreeMap<String, f64>,
    #[serde(flatten, skip_serializing_if = "BTreeMap::is_empty")]
    extra: BTreeMap<String, Value>,
}

fn unknown_field_warnings(doc: &ManifestDoc) -> Vec<String> {
    let mut warnings = Vec::new();
    let mut note = |extra: &BTreeMap<String, Value>, place: String| {
        for key in extra.keys() {
            warnings.push(format!("unknown field `{key}` in {place}"));
        }
    };
    note(&doc.extra, format!("case {}", doc.case_id));
    for conversation in &doc.conversations {
        note(
            &conversation.extra,
            format!("conversation {}", conversation.conversation_id),
        );
        for utterance in &conversation.utterances {
            note(
                &utterance.extra,
                format!(
                    "utterance {} of conversation {}",
                    utterance.utterance_id, conversation.conversation_id
                ),
            );
        }
    }
    warnings
}

fn speaker_id(raw: &str, path: &Path, place: &str) -> Result<SpeakerId, IoError> {
    SpeakerId::new(raw).map_err(|e| IoError::InvalidData {
        path: path.to_path_buf(),
        message: format!("{place}: {e}"),
    })
}

fn doc_to_case(doc: ManifestDoc, path: &Path) -> Result<Case, IoError> {
    let enrolled = doc
        .enrolled
        .iter()
        .map(|raw| speaker_id(raw, path, "enrolled list"))
        .collect::<Result<_, _>>()?;
    let conversations = doc
        .conversations
        .into_iter()
        .map(|conversation| {
            let utterances = conversation
                .utterances
                .into_iter()
                .map(|utterance| {
                    let place = format!(
                        "utterance {} of conversation {}",
                        utterance.utterance_id, conversation.conversation_id
                    );
                    let candidates = utterance
                        .scores
                        .iter()
                        .map(|(speaker, raw_score)| {
                            Ok(CandidateScore::new(
                                speaker_id(speaker, path, &place)?,
                                *raw_score,
                            ))
                        })
                        .collect::<Result<_, IoError>>()?;
                    let truth = utterance
                        .truth
                        .as_deref()
                        .map(|raw| speaker_id(raw, path, &place))
                        .transpose()?;
                    Ok(Utterance {
                        utterance_id: utterance.utterance_id,
                        candidates,
                        truth,
                    })
                })
                .collect::<Result<_, IoError>>()?;
            Ok(Conversation {
                conversation_id: conversation.conversation_id,
                index: 0, // reassigned by Case::new
                utterances,
            })
        })
        .collect::<Result<_, IoError>>()?;
    Ok(Case::new(doc.case_id, enrolled, conversations))
}

fn case_to_doc(case: &Case) -> ManifestDoc {
    ManifestDoc {
        case_id: case.case_id.clone(),
        enrolled: case.enrolled.iter().map(|s| s.to_string()).collect(),
        conversations: case
            .conversations
            .iter()
            .map(|conversation| ConversationDoc {
                conversation_id: conversation.conversation_id.clone(),
                utterances: conversation
                    .utterances
                    .iter()
                    .map(|utterance| UtteranceDoc {
                        utterance_id: utterance.utterance_id.clone(),
                        truth: utterance.truth.as_ref().map(|s| s.to_string()),
                        scores: utterance
                            .candidates
                            .iter()
                            .map(|c| (c.speaker.to_string(), c.raw_score))
                            .collect(),
                        extra: BTreeMap::new(),
                    })
                    .collect(),
                extra: BTreeMap::new(),
            })
            .collect(),
        extra: BTreeMap::new(),
    }
}

/// Loads and validates a case, returning tolerant-reader warnings alongside.
pub fn load_case_with_warnings(path: impl AsRef<Path>) -> Result<(Case, Vec<String>), IoError> {
    let path = path.as_ref();
    let content = read_to_string(path)?;
    let doc: ManifestDoc =
        serde_json::from_str(&content).map_err(|e| parse_error(path, &content, &e))?;
    let warnings = unknown_field_warnings(&doc);
    let case = doc_to_case(doc, path)?;
    let report = validate_case(&case);
    if !report.is_valid() {
        return Err(IoError::InvalidCase {
            path: path.to_path_buf(),
            report,
        });
    }
    Ok((case, warnings))
}

/// Loads and validates a case, discarding warnings.
pub fn load_case(path: impl AsRef<Path>) -> Result<Case, IoError> {
    load_case_with_warnings(path).map(|(case, _)| case)
}

/// Serializes a case as a manifest document. Deterministic: field order is
/// fixed and score maps are keyed in speaker order.
pub fn case_to_json(case: &Case) -> String {
    let mut out = serde_json::to_string_pretty(&case_to_doc(case))
        .expect("manifest serialization cannot fail");
    out.push('\n');
    out
}

/// Writes the manifest atomically.
pub fn write_case(case: &Case, path: impl AsRef<Path>) -> Result<(), IoError> {
    write_atomic(path.as_ref(), &case_to_json(case))
}
