//! Synthetic case generation: a community-structured speaker population,
//! conversations sampled with a tunable within-group bias, and noisy acoustic
//! scores with a controlled true-speaker margin.
//!
//! The generator exists to run desk-scale experiments: with groups that talk
//! mostly among themselves, interaction history carries real signal, and the
//! re-ranker's gain over the per-utterance baseline can be measured over many
//! seeds. A topology drift (regrouping the population mid-case) models the
//! scenario where that history goes stale.
//!
//! Everything is a pure function of the spec, including its seed. The same
//! spec yields the same case on every platform.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Case, CandidateScore, Conversation, SpeakerId, Utterance};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("n_speakers must be >= 2, got {0}")]
    SpeakerCount(usize),
    #[error("n_groups must lie in 1..=n_speakers, got {n_groups} for {n_speakers} speakers")]
    GroupCount { n_groups: usize, n_speakers: usize },
    #[error("within_group_bias must lie in [0, 1], got {0}")]
    Bias(f64),
    #[error("slots_per_conversation must satisfy 1 <= min <= max, got {min}..={max}")]
    SlotRange { min: usize, max: usize },
    #[error(
        "slots_per_conversation max {slots_max} exceeds the smallest group size {min_group}; \
         conversations draw distinct speakers from one group"
    )]
    SlotsExceedGroup { slots_max: usize, min_group: usize },
    #[error("score_separability must be finite and > 0, got {0}")]
    Separability(f64),
    #[error("noise_sd must be finite and >= 0, got {0}")]
    NoiseSd(f64),
    #[error("drift point {drift_point} is out of range for {n_conversations} conversations")]
    DriftOutOfRange {
        drift_point: usize,
        n_conversations: usize,
    },
    #[error("regroup map must assign each of the {n_groups} groups a target group below {n_groups}")]
    Regroup { n_groups: usize },
}

/// A change of group structure applied from `drift_point` onward:
/// conversations with index >= `drift_point` sample from the regrouped
/// partition. `regroup[g]` is the new group of everyone in old group `g`;
/// mapping two old groups to one target merges them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyDrift {
    pub drift_point: usize,
    pub regroup: Vec<usize>,
}

/// Full description of a synthetic case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_speakers: usize,
    pub n_groups: usize,
    /// Probability that a conversation draws all its speakers from a single
    /// group; otherwise speakers are drawn from the whole population.
    pub within_group_bias: f64,
    pub n_conversations: usize,
    /// Inclusive (min, max) range of utterance slots per conversation. Each
    /// slot gets a distinct true speaker.
    pub slots_per_conversation: (usize, usize),
    /// Mean margin of the true speaker's raw score over impostor scores.
    pub score_separability: f64,
    /// Standard deviation of the Gaussian noise added to every raw score.
    pub noise_sd: f64,
    pub seed: u64,
    pub drift: Option<TopologyDrift>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_speakers: 20,
            n_groups: 4,
            within_group_bias: 0.9,
            n_conversations: 50,
            slots_per_conversation: (2, 4),
            score_separability: 3.2,
            noise_sd: 1.0,
            seed: 0,
            drift: None,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_speakers < 2 {
            return Err(SynthError::SpeakerCount(self.n_speakers));
        }
        if self.n_groups == 0 || self.n_groups > self.n_speakers {
            return Err(SynthError::GroupCount {
                n_groups: self.n_groups,
                n_speakers: self.n_speakers,
            });
        }
        if !self.within_group_bias.is_finite() || !(0.0..=1.0).contains(&self.within_group_bias)
        {
            return Err(SynthError::Bias(self.within_group_bias));
        }
        let (min, max) = self.slots_per_conversation;
        if min == 0 || min > max {
            return Err(SynthError::SlotRange { min, max });
        }
        let min_group = self.n_speakers / self.n_groups;
        if max > min_group {
            return Err(SynthError::SlotsExceedGroup {
                slots_max: max,
                min_group,
            });
        }
        if !self.score_separability.is_finite() || self.score_separability <= 0.0 {
            return Err(SynthError::Separability(self.score_separability));
        }
        if !self.noise_sd.is_finite() || self.noise_sd < 0.0 {
            return Err(SynthError::NoiseSd(self.noise_sd));
        }
        if let Some(drift) = &self.drift {
            if drift.drift_point >= self.n_conversations {
                return Err(SynthError::DriftOutOfRange {
                    drift_point: drift.drift_point,
                    n_conversations: self.n_conversations,
                });
            }
            if drift.regroup.len() != self.n_groups
                || drift.regroup.iter().any(|g| *g >= self.n_groups)
            {
                return Err(SynthError::Regroup {
                    n_groups: self.n_groups,
                });
            }
        }
        Ok(())
    }

    /// All speaker ids in index order. Names are zero-padded so that
    /// lexicographic order equals index order.
    pub fn speakers(&self) -> Vec<SpeakerId> {
        let width = self.n_speakers.saturating_sub(1).to_string().len();
        (0..self.n_speakers)
            .map(|i| SpeakerId::new(format!("S{i:0width$}")).expect("generated id is non-empty"))
            .collect()
    }

    /// Base group of each speaker index: contiguous chunks, as balanced as
    /// possible (the first `n_speakers % n_groups` groups get one extra).
    pub fn base_group_of(&self) -> Vec<usize> {
        let base = self.n_speakers / self.n_groups;
        let extra = self.n_speakers % self.n_groups;
        let boundary = extra * (base + 1);
        (0..self.n_speakers)
            .map(|i| {
                if i < boundary {
                    i / (base + 1)
                } else {
                    extra + (i - boundary) / base
                }
            })
            .collect()
    }
}

/// Speaker indices per group, derived from a per-speaker assignment; empty
/// groups are dropped so that a uniform group draw never picks one.
fn partition(assignment: &[usize], n_groups: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); n_groups];
    for (speaker, group) in assignment.iter().enumerate() {
        groups[*group].push(speaker);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Returns a copy of `spec` whose conversations from `drift_point` onward
/// sample from the regrouped partition. `regroup` maps each old group id to
/// its new group id.
pub fn topology_drift(
    spec: &SynthSpec,
    drift_point: usize,
    regroup: &[usize],
) -> Result<SynthSpec, SynthError> {
    let drifted = SynthSpec {
        drift: Some(TopologyDrift {
            drift_point,
            regroup: regroup.to_vec(),
        }),
        ..spec.clone()
    };
    drifted.validate()?;
    Ok(drifted)
}

/// Generates a fully labeled case from the spec.
///
/// Per conversation, in fixed draw order: slot count, within-group coin,
/// group pick (within-group only), then the distinct true speakers; per slot,
/// every enrolled speaker's raw score in speaker order — the true speaker's
/// is `score_separability` plus noise, impostors' are pure noise.
pub fn generate_case(spec: &SynthSpec) -> Result<Case, SynthError> {
    spec.validate()?;
    let speakers = spec.speakers();
    let base_assignment = spec.base_group_of();
    let base_groups = partition(&base_assignment, spec.n_groups);
    let drifted_groups = spec.drift.as_ref().map(|drift| {
        let drifted_assignment: Vec<usize> = base_assignment
            .iter()
            .map(|g| drift.regroup[*g])
            .collect();
        partition(&drifted_assignment, spec.n_groups)
    });

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = if spec.noise_sd > 0.0 {
        Some(Normal::new(0.0, spec.noise_sd).expect("validated noise_sd"))
    } else {
        None
    };
    let all: Vec<usize> = (0..spec.n_speakers).collect();
    let (slots_min, slots_max) = spec.slots_per_conversation;

    let mut conversations = Vec::with_capacity(spec.n_conversations);
    for ci in 0..spec.n_conversations {
        let groups = match (&spec.drift, &drifted_groups) {
            (Some(drift), Some(drifted)) if ci >= drift.drift_point => drifted,
            _ => &base_groups,
        };
        let n_slots = rng.random_range(slots_min..=slots_max);
        let pool: &[usize] = if rng.random_bool(spec.within_group_bias) {
            &groups[rng.random_range(0..groups.len())]
        } else {
            &all
        };
        let truths: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), n_slots)
            .iter()
            .map(|i| pool[i])
            .collect();
        let utterances = truths
            .iter()
            .enumerate()
            .map(|(si, truth)| {
                let candidates = (0..spec.n_speakers)
                    .map(|s| {
                        let noise = normal.map_or(0.0, |n| n.sample(&mut rng));
                        let raw = if s == *truth {
                            spec.score_separability + noise
                        } else {
                            noise
                        };
                        CandidateScore::new(speakers[s].clone(), raw)
                    })
                    .collect();
                Utterance {
                    utterance_id: format!("u{si}"),
                    candidates,
                    truth: Some(speakers[*truth].clone()),
                }
            })
            .collect();
        conversations.push(Conversation {
            conversation_id: format!("c{ci}"),
            index: ci,
            utterances,
        });
    }
    Ok(Case::new(
        format!("synth-{}", spec.seed),
        speakers.into_iter().collect(),
        conversations,
    ))
}
