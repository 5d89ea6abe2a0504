//! Combination re-ranking: per-utterance normalization and pruning,
//! exhaustive enumeration of candidate assignments, joint scoring against a
//! graph snapshot, and the sequential case loop with graph feedback.
//!
//! A combination's score is the centrality-weighted mean of its speakers'
//! acoustic scores multiplied by one boost factor per speaker pair:
//!
//! ```text
//! s = [ sum_k s_k * (1 + C_k) / N ] * prod_{i<j} (1 + lambda * e_ij / E)
//! ```
//!
//! where `s_k` is the speaker's mean normalized score over its slots, `C_k`
//! its relative degree centrality, `e_ij` the pair interaction count, and `E`
//! the snapshot's total edge weight (`e_ij / E` taken as 0 when `E` is 0, so
//! an empty graph reduces the score to the plain mean of acoustic scores).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphSnapshot, InteractionGraph};
use crate::model::{
    validate_case, Case, CandidateScore, Config, Conversation, ModelError, SpeakerId, Utterance,
    ValidationReport,
};

/// Below this many combinations the sequential path is used even when the
/// `parallel` feature is enabled; forking threads costs more than scoring.
#[cfg(feature = "parallel")]
const PARALLEL_THRESHOLD: u64 = 4096;

#[derive(Debug, Error)]
pub enum RerankError {
    #[error("utterance {utterance_id}: non-finite raw score for speaker {speaker}")]
    NonFiniteScore {
        utterance_id: String,
        speaker: SpeakerId,
    },
    #[error("utterance {utterance_id} has no candidates")]
    NoCandidates { utterance_id: String },
    #[error("utterance {utterance_id}: candidate scores are not normalized")]
    NotNormalized { utterance_id: String },
    #[error("conversation {conversation_id} has no utterances")]
    EmptyConversation { conversation_id: String },
    #[error("assignment length {found} does not match slot count {expected}")]
    AssignmentLength { expected: usize, found: usize },
    #[error("utterance {utterance_id}: assigned speaker {speaker} is not a candidate")]
    AssignedNotCandidate {
        utterance_id: String,
        speaker: SpeakerId,
    },
    #[error("case failed validation: {0}")]
    InvalidCase(ValidationReport),
    #[error(transparent)]
    InvalidConfig(#[from] ModelError),
}

/// One speaker assignment per utterance slot, with the derived distinct
/// speaker set and the joint score.
///
/// When `allow_repeat_speakers` is false the selected combination has
/// `distinct.len() == assignment.len()`; the baseline combination is exempt,
/// since the per-slot acoustic argmax is unconstrained by design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub assignment: Vec<SpeakerId>,
    pub distinct: BTreeSet<SpeakerId>,
    pub score: f64,
}

/// The outcome of re-ranking one conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationDecision {
    pub conversation_id: String,
    /// Per-slot acoustic argmax, ties broken by speaker id.
    pub baseline: Combination,
    /// The enumerated combination with the highest joint score.
    pub reranked: Combination,
    /// Number of combinations actually scored for the winning pass.
    pub n_combinations_scored: u64,
    /// True when the combination budget forced `top_k` to be tightened.
    pub pruned: bool,
}

/// Result of processing a whole case: one decision per conversation plus the
/// interaction graph accumulated from the re-ranked predictions.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub decisions: Vec<ConversationDecision>,
    pub graph: InteractionGraph,
}

/// Min-max normalizes one utterance's raw scores into `[0, 1]`: the best raw
/// score maps to 1.0, the worst to 0.0. If all raw scores are equal (this
/// includes a single candidate) every norm is 1.0. Raw scores are preserved.
pub fn normalize_scores(utterance: &Utterance) -> Result<Utterance, RerankError> {
    if utterance.candidates.is_empty() {
        return Err(RerankError::NoCandidates {
            utterance_id: utterance.utterance_id.clone(),
        });
    }
    for cand in &utterance.candidates {
        if !cand.raw_score.is_finite() {
            return Err(RerankError::NonFiniteScore {
                utterance_id: utterance.utterance_id.clone(),
                speaker: cand.speaker.clone(),
            });
        }
    }
    let min = utterance
        .candidates
        .iter()
        .map(|c| c.raw_score)
        .fold(f64::INFINITY, f64::min);
    let max = utterance
        .candidates
        .iter()
        .map(|c| c.raw_score)
        .fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let candidates = utterance
        .candidates
        .iter()
        .map(|c| CandidateScore {
            speaker: c.speaker.clone(),
            raw_score: c.raw_score,
            norm_score: Some(if range == 0.0 {
                1.0
            } else {
                (c.raw_score - min) / range
            }),
        })
        .collect();
    Ok(Utterance {
        utterance_id: utterance.utterance_id.clone(),
        candidates,
        truth: utterance.truth.clone(),
    })
}

/// Normalizes every utterance of a conversation.
pub fn normalize_conversation(conversation: &Conversation) -> Result<Conversation, RerankError> {
    let utterances = conversation
        .utterances
        .iter()
        .map(normalize_scores)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Conversation {
        conversation_id: conversation.conversation_id.clone(),
        index: conversation.index,
        utterances,
    })
}

/// Applies the relative threshold and the `top_k` cut to one normalized
/// utterance. Keeps candidates whose norm is at least `rel_threshold` times
/// the utterance's best norm, sorts them by descending norm (ties by speaker
/// id), and truncates to `top_k`. The best candidate always survives.
pub fn prune_candidates(
    utterance: &Utterance,
    config: &Config,
) -> Result<Vec<CandidateScore>, RerankError> {
    let norm_of = |c: &CandidateScore| {
        c.norm_score.ok_or_else(|| RerankError::NotNormalized {
            utterance_id: utterance.utterance_id.clone(),
        })
    };
    if utterance.candidates.is_empty() {
        return Err(RerankError::NoCandidates {
            utterance_id: utterance.utterance_id.clone(),
        });
    }
    let mut best = f64::NEG_INFINITY;
    for cand in &utterance.candidates {
        best = best.max(norm_of(cand)?);
    }
    let cutoff = config.rel_threshold * best;
    let mut kept: Vec<CandidateScore> = utterance
        .candidates
        .iter()
        .filter(|c| c.norm_score.unwrap_or(0.0) >= cutoff)
        .cloned()
        .collect();
    kept.sort_by(|a, b| {
        b.norm_score
            .unwrap_or(0.0)
            .total_cmp(&a.norm_score.unwrap_or(0.0))
            .then_with(|| a.speaker.cmp(&b.speaker))
    });
    kept.truncate(config.top_k);
    Ok(kept)
}

/// The bare scoring arithmetic, shared by [`score_combination`]: `per_speaker`
/// holds `(s_k, C_k)` pairs, `pair_ratios` one `e_ij / E` per unordered pair.
fn combination_score_parts(per_speaker: &[(f64, f64)], pair_ratios: &[f64], lambda: f64) -> f64 {
    let mut acoustic = 0.0;
    for (s, c) in per_speaker {
        acoustic += s * (1.0 + c);
    }
    acoustic /= per_speaker.len() as f64;
    let mut product = 1.0;
    for ratio in pair_ratios {
        product *= 1.0 + lambda * ratio;
    }
    acoustic * product
}

/// Scores one assignment (one speaker per slot) against a graph snapshot.
///
/// `s_k` is the mean normalized score over the slots assigned to speaker `k`,
/// so repeated speakers contribute one aggregated term. The result is always
/// non-negative and the pair product factor is always at least 1.
pub fn score_combination(
    assignment: &[SpeakerId],
    conversation: &Conversation,
    snapshot: &GraphSnapshot,
    config: &Config,
) -> Result<f64, RerankError> {
    if assignment.len() != conversation.n_slots() {
        return Err(RerankError::AssignmentLength {
            expected: conversation.n_slots(),
            found: assignment.len(),
        });
    }
    let mut accum: BTreeMap<&SpeakerId, (f64, u32)> = BTreeMap::new();
    for (speaker, utterance) in assignment.iter().zip(&conversation.utterances) {
        let cand = utterance
            .candidates
            .iter()
            .find(|c| &c.speaker == speaker)
            .ok_or_else(|| RerankError::AssignedNotCandidate {
                utterance_id: utterance.utterance_id.clone(),
                speaker: speaker.clone(),
            })?;
        let norm = cand.norm_score.ok_or_else(|| RerankError::NotNormalized {
            utterance_id: utterance.utterance_id.clone(),
        })?;
        let entry = accum.entry(speaker).or_insert((0.0, 0));
        entry.0 += norm;
        entry.1 += 1;
    }
    let total = snapshot.total_weight();
    let per_speaker: Vec<(f64, f64)> = accum
        .iter()
        .map(|(speaker, (sum, count))| {
            (sum / f64::from(*count), snapshot.degree_centrality(speaker))
        })
        .collect();
    let distinct: Vec<&SpeakerId> = accum.keys().copied().collect();
    let mut pair_ratios = Vec::with_capacity(distinct.len() * (distinct.len() - 1) / 2);
    for (i, a) in distinct.iter().enumerate() {
        for b in &distinct[i + 1..] {
            let weight = snapshot
                .pair_weight(a, b)
                .expect("distinct speakers cannot self-loop");
            pair_ratios.push(if total == 0 {
                0.0
            } else {
                weight as f64 / total as f64
            });
        }
    }
    Ok(combination_score_parts(
        &per_speaker,
        &pair_ratios,
        config.lambda,
    ))
}

// ---------------------------------------------------------------------------
// Enumeration core
//
// Candidates are interned per conversation: the union of surviving candidates
// is sorted lexicographically and each speaker gets its rank, so comparing
// interned ids is exactly comparing speaker ids. Combinations are indexed in
// mixed radix over the per-slot candidate lists (slot 0 most significant,
// index 0 = every slot's acoustic argmax = the baseline). Scoring walks the
// intern universe in ascending order, which makes the arithmetic bit-identical
// to `score_combination` for the same assignment.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct SlotCandidate {
    intern: u32,
    norm: f64,
}

struct ScoringContext {
    slots: Vec<Vec<SlotCandidate>>,
    strides: Vec<u64>,
    universe: Vec<SpeakerId>,
    centrality: Vec<f64>,
    /// Flattened `u x u` matrix of `1 + lambda * e_ij / E` factors.
    pair_factor: Vec<f64>,
    n_combinations: u64,
    require_distinct: bool,
}

struct Scratch {
    sums: Vec<f64>,
    counts: Vec<u32>,
}

impl Scratch {
    fn new(universe: usize) -> Self {
        Self {
            sums: vec![0.0; universe],
            counts: vec![0; universe],
        }
    }

    fn reset(&mut self) {
        self.sums.fill(0.0);
        self.counts.fill(0);
    }
}

impl ScoringContext {
    fn build(lists: &[Vec<CandidateScore>], snapshot: &GraphSnapshot, config: &Config) -> Self {
        let universe: Vec<SpeakerId> = lists
            .iter()
            .flatten()
            .map(|c| c.speaker.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let intern_of = |speaker: &SpeakerId| -> u32 {
            universe
                .binary_search(speaker)
                .expect("speaker interned from the same lists") as u32
        };
        let slots: Vec<Vec<SlotCandidate>> = lists
            .iter()
            .map(|list| {
                list.iter()
                    .map(|c| SlotCandidate {
                        intern: intern_of(&c.speaker),
                        norm: c.norm_score.expect("pruned candidates are normalized"),
                    })
                    .collect()
            })
            .collect();
        let mut strides = vec![1u64; slots.len()];
        for s in (0..slots.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1].saturating_mul(slots[s + 1].len() as u64);
        }
        let n_combinations = slots
            .iter()
            .fold(1u64, |acc, list| acc.saturating_mul(list.len() as u64));
        let total = snapshot.total_weight();
        let centrality = universe
            .iter()
            .map(|s| snapshot.degree_centrality(s))
            .collect();
        let u = universe.len();
        let mut pair_factor = vec![1.0; u * u];
        for i in 0..u {
            for j in i + 1..u {
                let weight = snapshot
                    .pair_weight(&universe[i], &universe[j])
                    .expect("universe entries are distinct");
                let ratio = if total == 0 {
                    0.0
                } else {
                    weight as f64 / total as f64
                };
                let factor = 1.0 + config.lambda * ratio;
                pair_factor[i * u + j] = factor;
                pair_factor[j * u + i] = factor;
            }
        }
        Self {
            slots,
            strides,
            universe,
            centrality,
            pair_factor,
            n_combinations,
            require_distinct: !config.allow_repeat_speakers,
        }
    }

    #[inline]
    fn digit(&self, index: u64, slot: usize) -> usize {
        ((index / self.strides[slot]) % self.slots[slot].len() as u64) as usize
    }

    /// Scores the combination at `index`. The second component is false when
    /// the combination repeats a speaker and repeats are disallowed.
    fn score_index(&self, index: u64, scratch: &mut Scratch) -> (f64, bool) {
        scratch.reset();
        let n_slots = self.slots.len();
        for slot in 0..n_slots {
            let cand = self.slots[slot][self.digit(index, slot)];
            scratch.sums[cand.intern as usize] += cand.norm;
            scratch.counts[cand.intern as usize] += 1;
        }
        let u = self.universe.len();
        let mut n_distinct = 0u32;
        let mut acoustic = 0.0;
        for i in 0..u {
            if scratch.counts[i] > 0 {
                n_distinct += 1;
                let mean = scratch.sums[i] / f64::from(scratch.counts[i]);
                acoustic += mean * (1.0 + self.centrality[i]);
            }
        }
        acoustic /= f64::from(n_distinct);
        let mut product = 1.0;
        for i in 0..u {
            if scratch.counts[i] == 0 {
                continue;
            }
            for j in i + 1..u {
                if scratch.counts[j] > 0 {
                    product *= self.pair_factor[i * u + j];
                }
            }
        }
        let valid = !self.require_distinct || n_distinct as usize == n_slots;
        (acoustic * product, valid)
    }

    /// Orders two combination indices by their assignment tuples (speaker ids
    /// slot by slot). Used to break score ties deterministically.
    fn cmp_assignment(&self, a: u64, b: u64) -> Ordering {
        for slot in 0..self.slots.len() {
            let ia = self.slots[slot][self.digit(a, slot)].intern;
            let ib = self.slots[slot][self.digit(b, slot)].intern;
            match ia.cmp(&ib) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    fn materialize(&self, index: u64, score: f64) -> Combination {
        let assignment: Vec<SpeakerId> = (0..self.slots.len())
            .map(|slot| {
                self.universe[self.slots[slot][self.digit(index, slot)].intern as usize].clone()
            })
            .collect();
        let distinct: BTreeSet<SpeakerId> = assignment.iter().cloned().collect();
        Combination {
            assignment,
            distinct,
            score,
        }
    }

    /// Folds `candidate` into the running best under (score desc, assignment
    /// tuple asc). Total order, so the reduction is deterministic regardless
    /// of evaluation order.
    fn better(&self, current: Option<(f64, u64)>, candidate: (f64, u64)) -> Option<(f64, u64)> {
        match current {
            None => Some(candidate),
            Some((best_score, best_index)) => {
                if candidate.0 > best_score
                    || (candidate.0 == best_score
                        && self.cmp_assignment(candidate.1, best_index) == Ordering::Less)
                {
                    Some(candidate)
                } else {
                    current
                }
            }
        }
    }

    fn merge(
        &self,
        a: (Option<(f64, u64)>, u64),
        b: (Option<(f64, u64)>, u64),
    ) -> (Option<(f64, u64)>, u64) {
        let best = match b.0 {
            None => a.0,
            Some(cand) => self.better(a.0, cand),
        };
        (best, a.1 + b.1)
    }

    fn select_sequential(&self) -> (Option<(f64, u64)>, u64) {
        let mut scratch = Scratch::new(self.universe.len());
        let mut best: Option<(f64, u64)> = None;
        let mut scored = 0u64;
        for index in 0..self.n_combinations {
            let (score, valid) = self.score_index(index, &mut scratch);
            if valid {
                scored += 1;
                best = self.better(best, (score, index));
            }
        }
        (best, scored)
    }

    #[cfg(feature = "parallel")]
    fn select_parallel(&self) -> (Option<(f64, u64)>, u64) {
        use rayon::prelude::*;
        (0..self.n_combinations)
            .into_par_iter()
            .fold(
                || (None, 0u64, Scratch::new(self.universe.len())),
                |(best, scored, mut scratch), index| {
                    let (score, valid) = self.score_index(index, &mut scratch);
                    if valid {
                        (self.better(best, (score, index)), scored + 1, scratch)
                    } else {
                        (best, scored, scratch)
                    }
                },
            )
            .map(|(best, scored, _)| (best, scored))
            .reduce(|| (None, 0), |a, b| self.merge(a, b))
    }
}

fn combination_count(lists: &[Vec<CandidateScore>]) -> u64 {
    lists
        .iter()
        .fold(1u64, |acc, list| acc.saturating_mul(list.len() as u64))
}

fn prepare_slots(
    conversation: &Conversation,
    config: &Config,
) -> Result<(Vec<Vec<CandidateScore>>, bool), RerankError> {
    if conversation.utterances.is_empty() {
        return Err(RerankError::EmptyConversation {
            conversation_id: conversation.conversation_id.clone(),
        });
    }
    let mut lists: Vec<Vec<CandidateScore>> = conversation
        .utterances
        .iter()
        .map(|u| prune_candidates(u, config))
        .collect::<Result<_, _>>()?;

    // Budget guard: shrink top_k one step at a time until the product of the
    // per-slot list sizes fits. k = 1 always fits since max_combinations >= 1.
    let mut tightened = false;
    if combination_count(&lists) > config.max_combinations {
        tightened = true;
        let mut k = lists.iter().map(Vec::len).max().unwrap_or(1);
        while k > 1 && combination_count(&lists) > config.max_combinations {
            k -= 1;
            for list in &mut lists {
                list.truncate(k);
            }
        }
    }
    Ok((lists, tightened))
}

enum ExecMode {
    Auto,
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

fn select_with_mode(
    conversation: &Conversation,
    snapshot: &GraphSnapshot,
    config: &Config,
    mode: ExecMode,
) -> Result<ConversationDecision, RerankError> {
    config.validate()?;
    let (lists, pruned) = prepare_slots(conversation, config)?;
    let mut ctx = ScoringContext::build(&lists, snapshot, config);

    let run = |ctx: &ScoringContext| match mode {
        ExecMode::Sequential => ctx.select_sequential(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => ctx.select_parallel(),
        ExecMode::Auto => {
            #[cfg(feature = "parallel")]
            if ctx.n_combinations >= PARALLEL_THRESHOLD {
                return ctx.select_parallel();
            }
            ctx.select_sequential()
        }
    };

    let (mut best, mut scored) = run(&ctx);
    if best.is_none() && ctx.require_distinct {
        // No repeat-free assignment exists for these candidate lists; fall
        // back to allowing repeats for this conversation.
        ctx.require_distinct = false;
        (best, scored) = run(&ctx);
    }
    let (best_score, best_index) = best.expect("at least one combination exists");

    let mut scratch = Scratch::new(ctx.universe.len());
    let (baseline_score, _) = ctx.score_index(0, &mut scratch);
    Ok(ConversationDecision {
        conversation_id: conversation.conversation_id.clone(),
        baseline: ctx.materialize(0, baseline_score),
        reranked: ctx.materialize(best_index, best_score),
        n_combinations_scored: scored,
        pruned,
    })
}

/// Enumerates the pruned candidate combinations of a normalized conversation,
/// scores each against the snapshot, and returns the argmax (score ties
/// broken by the lexicographically smallest assignment tuple). The baseline
/// field holds the per-slot acoustic argmax. Dispatches to the parallel path
/// for large enumerations when the `parallel` feature is enabled.
pub fn enumerate_and_select(
    conversation: &Conversation,
    snapshot: &GraphSnapshot,
    config: &Config,
) -> Result<ConversationDecision, RerankError> {
    select_with_mode(conversation, snapshot, config, ExecMode::Auto)
}

/// As [`enumerate_and_select`], forcing the sequential path.
pub fn enumerate_and_select_seq(
    conversation: &Conversation,
    snapshot: &GraphSnapshot,
    config: &Config,
) -> Result<ConversationDecision, RerankError> {
    select_with_mode(conversation, snapshot, config, ExecMode::Sequential)
}

/// As [`enumerate_and_select`], forcing the parallel path.
#[cfg(feature = "parallel")]
pub fn enumerate_and_select_par(
    conversation: &Conversation,
    snapshot: &GraphSnapshot,
    config: &Config,
) -> Result<ConversationDecision, RerankError> {
    select_with_mode(conversation, snapshot, config, ExecMode::Parallel)
}

/// Runs the whole case strictly in conversation order. Each conversation is
/// normalized, pruned, and scored against a snapshot of the graph as it stood
/// before that conversation; the graph is then updated with the clique of the
/// re-ranked distinct speaker set. The graph learns from its own predictions,
/// never from ground truth.
pub fn process_case(case: &Case, config: &Config) -> Result<CaseOutcome, RerankError> {
    config.validate()?;
    let report = validate_case(case);
    if !report.is_valid() {
        return Err(RerankError::InvalidCase(report));
    }
    let mut graph = InteractionGraph::new();
    let mut decisions = Vec::with_capacity(case.conversations.len());
    for conversation in &case.conversations {
        let normalized = normalize_conversation(conversation)?;
        let snapshot = graph.snapshot();
        let decision = enumerate_and_select(&normalized, &snapshot, config)?;
        graph.record_conversation(&decision.reranked.distinct);
        decisions.push(decision);
    }
    Ok(CaseOutcome { decisions, graph })
}
