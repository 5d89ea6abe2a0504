//! Independent reference implementations for the acceptance suite.
//!
//! Everything in this module is written directly from the scoring definition,
//! deliberately sharing no code with the library: plain string speaker names,
//! a flat edge map instead of the interned graph, and recursive enumeration
//! instead of the indexed combination walk. The suite checks the library
//! against these, so they must stay naive and obviously correct rather than
//! fast.

use std::collections::BTreeMap;

/// Min-max normalization of one slot's raw scores: best maps to 1.0, worst to
/// 0.0, and an all-equal slate maps every candidate to 1.0.
pub fn min_max(raws: &[f64]) -> Vec<f64> {
    let max = raws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = raws.iter().copied().fold(f64::INFINITY, f64::min);
    if min == max {
        return vec![1.0; raws.len()];
    }
    raws.iter().map(|raw| (raw - min) / (max - min)).collect()
}

/// A weighted undirected graph as a bare edge map keyed by the sorted name
/// pair.
#[derive(Default)]
pub struct RefGraph {
    edges: BTreeMap<(String, String), u64>,
}

impl RefGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(&mut self, a: &str, b: &str, weight: u64) {
        assert_ne!(a, b, "reference graph rejects self-loops");
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        *self.edges.entry(key).or_insert(0) += weight;
    }

    pub fn total(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn pair(&self, a: &str, b: &str) -> u64 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges
            .get(&(key.0.to_string(), key.1.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// Relative degree centrality: incident weight over total weight, 0 on an
    /// empty graph.
    pub fn centrality(&self, name: &str) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let incident: u64 = self
            .edges
            .iter()
            .filter(|((a, b), _)| a == name || b == name)
            .map(|(_, w)| *w)
            .sum();
        incident as f64 / total as f64
    }
}

/// Scores one assignment directly from the definition: the mean over distinct
/// speakers of `s_k * (1 + C_k)` — where `s_k` is the speaker's mean
/// normalized score over its slots — times, for every unordered distinct
/// pair, `1 + lambda * e_ij / E` (the ratio is 0 on an empty graph).
///
/// `candidates[slot]` lists `(name, normalized score)` for that slot.
pub fn score(
    assignment: &[String],
    candidates: &[Vec<(String, f64)>],
    graph: &RefGraph,
    lambda: f64,
) -> f64 {
    assert_eq!(assignment.len(), candidates.len());
    let mut norms_by_speaker: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (name, slot) in assignment.iter().zip(candidates) {
        let norm = slot
            .iter()
            .find(|(candidate, _)| candidate == name)
            .map(|(_, norm)| *norm)
            .expect("assigned speaker is a candidate of its slot");
        norms_by_speaker.entry(name).or_default().push(norm);
    }

    let mut acoustic = 0.0;
    for (name, norms) in &norms_by_speaker {
        let s_k = norms.iter().sum::<f64>() / norms.len() as f64;
        acoustic += s_k * (1.0 + graph.centrality(name));
    }
    acoustic /= norms_by_speaker.len() as f64;

    let total = graph.total();
    let names: Vec<&str> = norms_by_speaker.keys().copied().collect();
    let mut product = 1.0;
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let ratio = if total == 0 {
                0.0
            } else {
                graph.pair(a, b) as f64 / total as f64
            };
            product *= 1.0 + lambda * ratio;
        }
    }
    acoustic * product
}

/// Brute force over the full cartesian product of the candidate lists (no
/// pruning, repeats allowed), returning the best-scoring assignment and its
/// score. Candidate lists must be sorted by name; ties then resolve to the
/// lexicographically smallest assignment because enumeration is in lex order
/// and only a strictly better score replaces the incumbent.
pub fn best_assignment(
    candidates: &[Vec<(String, f64)>],
    graph: &RefGraph,
    lambda: f64,
) -> (Vec<String>, f64) {
    fn recurse(
        slot: usize,
        candidates: &[Vec<(String, f64)>],
        graph: &RefGraph,
        lambda: f64,
        chosen: &mut Vec<String>,
        best: &mut Option<(Vec<String>, f64)>,
    ) {
        if slot == candidates.len() {
            let s = score(chosen, candidates, graph, lambda);
            if best.as_ref().is_none_or(|(_, incumbent)| s > *incumbent) {
                *best = Some((chosen.clone(), s));
            }
            return;
        }
        for (name, _) in &candidates[slot] {
            chosen.push(name.clone());
            recurse(slot + 1, candidates, graph, lambda, chosen, best);
            chosen.pop();
        }
    }

    let mut best = None;
    recurse(0, candidates, graph, lambda, &mut Vec::new(), &mut best);
    best.expect("candidate lists are non-empty")
}

/// Two-sided exact sign test for paired differences: the probability, under a
/// fair coin, of a win/loss split at least as lopsided as the observed one.
/// Ties are dropped before calling this.
pub fn sign_test_p(wins: u64, losses: u64) -> f64 {
    let n = wins + losses;
    let k = wins.max(losses);
    let mut coefficient = 1.0f64; // C(n, 0)
    let mut tail = 0.0f64;
    for i in 0..=n {
        if i >= k {
            tail += coefficient;
        }
        coefficient = coefficient * (n - i) as f64 / (i + 1) as f64;
    }
    (2.0 * tail / 2.0f64.powi(n as i32)).min(1.0)
}
