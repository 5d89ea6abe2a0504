//! Accuracy metrics over re-ranking decisions: per-slot speaker accuracy,
//! all-or-nothing conversation accuracy, and the baseline-vs-reranked diff
//! report.
//!
//! A conversation counts as correct only when every slot's predicted speaker
//! equals its label — the strictest reading of "identify all speakers".
//! Set-level agreement (right speakers, wrong slots) is reported as a
//! separate column but never feeds the headline metrics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Case, Conversation, SpeakerId};
use crate::rerank::ConversationDecision;

/// Which of a decision's two assignments to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Baseline,
    Reranked,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("conversation {conversation_id}, utterance {utterance_id}: missing ground-truth label")]
    MissingTruth {
        conversation_id: String,
        utterance_id: String,
    },
    #[error("case has {n_conversations} conversations but {n_decisions} decisions")]
    DecisionCountMismatch {
        n_conversations: usize,
        n_decisions: usize,
    },
    #[error("decision {position} is for conversation {decision_id}, expected {conversation_id}")]
    ConversationMismatch {
        position: usize,
        conversation_id: String,
        decision_id: String,
    },
    #[error("conversation {conversation_id}: {n_slots} slots but {n_assigned} assigned speakers")]
    SlotCountMismatch {
        conversation_id: String,
        n_slots: usize,
        n_assigned: usize,
    },
}

/// Per-conversation scoring outcome for one side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationOutcome {
    pub conversation_id: String,
    /// Every slot's prediction equals its label.
    pub correct: bool,
    pub n_slots_correct: usize,
    pub n_slots: usize,
    /// The distinct predicted speaker set equals the distinct labeled set.
    /// Informational only; a swapped pair of slots sets this without
    /// `correct`.
    pub set_correct: bool,
}

/// Accuracy summary for one side of a fully labeled case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub speaker_accuracy: f64,
    pub conversation_accuracy: f64,
    pub n_utterances: usize,
    pub n_conversations: usize,
    pub per_conversation: Vec<ConversationOutcome>,
}

/// One slot where the baseline and re-ranked assignments disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub conversation_id: String,
    pub slot: usize,
    /// Present only when the case is labeled.
    pub truth: Option<SpeakerId>,
    pub baseline_pred: SpeakerId,
    pub reranked_pred: SpeakerId,
}

fn assignment_of(decision: &ConversationDecision, side: Side) -> &[SpeakerId] {
    match side {
        Side::Baseline => &decision.baseline.assignment,
        Side::Reranked => &decision.reranked.assignment,
    }
}

/// Pairs each conversation with its decision, insisting on positional
/// alignment by id.
fn align<'a>(
    decisions: &'a [ConversationDecision],
    case: &'a Case,
) -> Result<Vec<(&'a Conversation, &'a ConversationDecision)>, MetricsError> {
    if decisions.len() != case.conversations.len() {
        return Err(MetricsError::DecisionCountMismatch {
            n_conversations: case.conversations.len(),
            n_decisions: decisions.len(),
        });
    }
    case.conversations
        .iter()
        .zip(decisions)
        .enumerate()
        .map(|(position, (conversation, decision))| {
            if conversation.conversation_id != decision.conversation_id {
                return Err(MetricsError::ConversationMismatch {
                    position,
                    conversation_id: conversation.conversation_id.clone(),
                    decision_id: decision.conversation_id.clone(),
                });
            }
            Ok((conversation, decision))
        })
        .collect()
}

fn labeled_slots(conversation: &Conversation) -> Result<Vec<&SpeakerId>, MetricsError> {
    conversation
        .utterances
        .iter()
        .map(|utterance| {
            utterance
                .truth
                .as_ref()
                .ok_or_else(|| MetricsError::MissingTruth {
                    conversation_id: conversation.conversation_id.clone(),
                    utterance_id: utterance.utterance_id.clone(),
                })
        })
        .collect()
}

/// Scores one side of the decisions against the case labels. Requires every
/// utterance to be labeled. An empty case yields both accuracies as 1.0
/// (vacuously nothing was misidentified).
pub fn accuracy_report(
    decisions: &[ConversationDecision],
    case: &Case,
    side: Side,
) -> Result<AccuracyReport, MetricsError> {
    let mut per_conversation = Vec::with_capacity(case.conversations.len());
    let mut slots_correct = 0usize;
    let mut slots_total = 0usize;
    let mut conversations_correct = 0usize;
    for (conversation, decision) in align(decisions, case)? {
        let truths = labeled_slots(conversation)?;
        let predictions = assignment_of(decision, side);
        if predictions.len() != truths.len() {
            return Err(MetricsError::SlotCountMismatch {
                conversation_id: conversation.conversation_id.clone(),
                n_slots: truths.len(),
                n_assigned: predictions.len(),
            });
        }
        let n_correct = predictions
            .iter()
            .zip(&truths)
            .filter(|(pred, truth)| pred == *truth)
            .count();
        let truth_set: BTreeSet<&SpeakerId> = truths.iter().copied().collect();
        let pred_set: BTreeSet<&SpeakerId> = predictions.iter().collect();
        let correct = n_correct == truths.len();
        per_conversation.push(ConversationOutcome {
            conversation_id: conversation.conversation_id.clone(),
            correct,
            n_slots_correct: n_correct,
            n_slots: truths.len(),
            set_correct: truth_set == pred_set,
        });
        slots_correct += n_correct;
        slots_total += truths.len();
        conversations_correct += usize::from(correct);
    }
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Ok(AccuracyReport {
        speaker_accuracy: ratio(slots_correct, slots_total),
        conversation_accuracy: ratio(conversations_correct, case.conversations.len()),
        n_utterances: slots_total,
        n_conversations: case.conversations.len(),
        per_conversation,
    })
}

/// Fraction of utterance slots whose predicted speaker equals its label,
/// micro-averaged over all conversations.
pub fn speaker_accuracy(
    decisions: &[ConversationDecision],
    case: &Case,
    side: Side,
) -> Result<f64, MetricsError> {
    accuracy_report(decisions, case, side).map(|r| r.speaker_accuracy)
}

/// Fraction of conversations in which every slot is identified correctly.
pub fn conversation_accuracy(
    decisions: &[ConversationDecision],
    case: &Case,
    side: Side,
) -> Result<f64, MetricsError> {
    accuracy_report(decisions, case, side).map(|r| r.conversation_accuracy)
}

/// One entry per slot where the baseline and re-ranked predictions disagree,
/// in case order. Works on unlabeled cases; `truth` is carried when present.
pub fn diff_report(
    decisions: &[ConversationDecision],
    case: &Case,
) -> Result<Vec<DiffEntry>, MetricsError> {
    let mut entries = Vec::new();
    for (conversation, decision) in align(decisions, case)? {
        let baseline = &decision.baseline.assignment;
        let reranked = &decision.reranked.assignment;
        if baseline.len() != conversation.n_slots() || reranked.len() != conversation.n_slots() {
            return Err(MetricsError::SlotCountMismatch {
                conversation_id: conversation.conversation_id.clone(),
                n_slots: conversation.n_slots(),
                n_assigned: baseline.len().max(reranked.len()),
            });
        }
        for (slot, (b, r)) in baseline.iter().zip(reranked).enumerate() {
            if b != r {
                entries.push(DiffEntry {
                    conversation_id: conversation.conversation_id.clone(),
                    slot,
                    truth: conversation.utterances[slot].truth.clone(),
                    baseline_pred: b.clone(),
                    reranked_pred: r.clone(),
                });
            }
        }
    }
    Ok(entries)
}
