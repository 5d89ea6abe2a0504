//! The interaction graph: an undirected weighted graph whose nodes are
//! speakers and whose edge weights count the conversations a pair has shared.
//!
//! The graph is append-only: each decided conversation increments the weight
//! of every unordered speaker pair present in it. Scoring reads go through
//! [`GraphSnapshot`], an immutable view detached from later updates.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;
use std::sync::Arc;

use thiserror::Error;

use crate::model::SpeakerId;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("self-loop query for speaker {0}")]
    SelfLoop(SpeakerId),
    #[error("edge weight must be >= 1, got {weight} for pair {a} -- {b}")]
    ZeroWeight { a: SpeakerId, b: SpeakerId, weight: u64 },
}

/// Undirected weighted interaction graph.
///
/// Invariants: no self-loops, every stored edge weight is >= 1, and
/// `total_weight` always equals the sum of all edge weights (maintained
/// incrementally, checked against recomputation in tests).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InteractionGraph {
    nodes: BTreeSet<SpeakerId>,
    edges: BTreeMap<(SpeakerId, SpeakerId), u64>,
    incident: BTreeMap<SpeakerId, u64>,
    total_weight: u64,
}

fn ordered_pair(a: &SpeakerId, b: &SpeakerId) -> (SpeakerId, SpeakerId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl InteractionGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from explicit weighted edges (used by imports).
    /// Rejects self-loops and zero weights; repeated pairs accumulate.
    pub fn from_weighted_edges<I>(edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (SpeakerId, SpeakerId, u64)>,
    {
        let mut graph = Self::new();
        for (a, b, weight) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if weight == 0 {
                return Err(GraphError::ZeroWeight { a, b, weight });
            }
            graph.add_weight(&a, &b, weight);
        }
        Ok(graph)
    }

    /// Registers a node without any edges.
    pub fn add_node(&mut self, speaker: &SpeakerId) {
        if !self.nodes.contains(speaker) {
            self.nodes.insert(speaker.clone());
        }
    }

    fn add_weight(&mut self, a: &SpeakerId, b: &SpeakerId, weight: u64) {
        self.add_node(a);
        self.add_node(b);
        *self.edges.entry(ordered_pair(a, b)).or_insert(0) += weight;
        *self.incident.entry(a.clone()).or_insert(0) += weight;
        *self.incident.entry(b.clone()).or_insert(0) += weight;
        self.total_weight += weight;
    }

    /// Records one conversation among `speakers`: every unordered pair of
    /// distinct participants gains one interaction. A singleton adds the node
    /// but no edges; an empty set is a no-op.
    pub fn record_conversation(&mut self, speakers: &BTreeSet<SpeakerId>) {
        let ordered: Vec<&SpeakerId> = speakers.iter().collect();
        for speaker in &ordered {
            self.add_node(speaker);
        }
        for (i, a) in ordered.iter().enumerate() {
            for b in &ordered[i + 1..] {
                self.add_weight(a, b, 1);
            }
        }
    }

    /// Number of past conversations shared by `a` and `b`; 0 when the edge is
    /// absent. Symmetric in its arguments.
    pub fn pair_weight(&self, a: &SpeakerId, b: &SpeakerId) -> Result<u64, GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a.clone()));
        }
        Ok(self
            .edges
            .get(&ordered_pair(a, b))
            .copied()
            .unwrap_or(0))
    }

    /// Relative degree centrality: the speaker's incident edge weight divided
    /// by the graph's total edge weight. Lies in `[0, 2]` and sums to 2 over
    /// all nodes whenever the graph has any edge. Returns 0 on an empty graph
    /// or for an unknown speaker.
    pub fn degree_centrality(&self, speaker: &SpeakerId) -> f64 {
        if self.total_weight == 0 {
            return 0.0;
        }
        let incident = self.incident.get(speaker).copied().unwrap_or(0);
        incident as f64 / self.total_weight as f64
    }

    /// Sum of the weights of edges incident to `speaker`.
    pub fn incident_weight(&self, speaker: &SpeakerId) -> u64 {
        self.incident.get(speaker).copied().unwrap_or(0)
    }

    /// Sum of all edge weights.
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Nodes in lexicographic order.
    pub fn nodes(&self) -> impl Iterator<Item = &SpeakerId> {
        self.nodes.iter()
    }

    /// Edges in lexicographic pair order, with weights.
    pub fn edges(&self) -> impl Iterator<Item = (&SpeakerId, &SpeakerId, u64)> {
        self.edges.iter().map(|((a, b), w)| (a, b, *w))
    }

    /// An immutable view of the current state, unaffected by later writes.
    pub fn snapshot(&self) -> GraphSnapshot {
        GraphSnapshot(Arc::new(self.clone()))
    }
}

/// Cheaply cloneable immutable view of an [`InteractionGraph`], shared by any
/// number of concurrent scorers.
#[derive(Debug, Clone)]
pub struct GraphSnapshot(Arc<InteractionGraph>);

impl Deref for GraphSnapshot {
    type Target = InteractionGraph;

    fn deref(&self) -> &InteractionGraph {
        &self.0
    }
}

impl GraphSnapshot {
    pub fn empty() -> Self {
        GraphSnapshot(Arc::new(InteractionGraph::new()))
    }
}
