//! Interaction graph exports: Graphviz dot for eyeballing, adjacency JSON for
//! round-tripping. Both list nodes and edges in lexicographic order, so equal
//! graphs export to equal bytes.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{parse_error, read_to_string, write_atomic, IoError};
use crate::graph::InteractionGraph;
use crate::model::SpeakerId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    AdjacencyJson,
}

impl FromStr for GraphFormat {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "adjacency-json" => Ok(GraphFormat::AdjacencyJson),
            other => Err(IoError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AdjacencyDoc {
    nodes: Vec<String>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    a: String,
    b: String,
    weight: u64,
}

fn dot_escape(id: &str) -> String {
    id.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz dot with the interaction count as both `weight` and `label`, so
/// renderers show edge multiplicity the way a hand-drawn network would.
pub fn graph_to_dot(graph: &InteractionGraph) -> String {
    let mut out = String::from("graph interactions {\n");
    for node in graph.nodes() {
        let _ = writeln!(out, "  \"{}\";", dot_escape(node.as_str()));
    }
    for (a, b, weight) in graph.edges() {
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [weight={weight}, label=\"{weight}\"];",
            dot_escape(a.as_str()),
            dot_escape(b.as_str()),
        );
    }
    out.push_str("}\n");
    out
}

/// Adjacency JSON: sorted node list plus sorted weighted undirected edges.
pub fn graph_to_adjacency_json(graph: &InteractionGraph) -> String {
    let doc = AdjacencyDoc {
        nodes: graph.nodes().map(|n| n.to_string()).collect(),
        edges: graph
            .edges()
            .map(|(a, b, weight)| EdgeDoc {
                a: a.to_string(),
                b: b.to_string(),
                weight,
            })
            .collect(),
    };
    let mut out =
        serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail");
    out.push('\n');
    out
}

/// Writes the graph in the requested format, atomically.
pub fn export_graph(
    graph: &InteractionGraph,
    format: GraphFormat,
    path: impl AsRef<Path>,
) -> Result<(), IoError> {
    let rendered = match format {
        GraphFormat::Dot => graph_to_dot(graph),
        GraphFormat::AdjacencyJson => graph_to_adjacency_json(graph),
    };
    write_atomic(path.as_ref(), &rendered)
}

/// Reads an adjacency JSON export back into a graph.
pub fn import_graph_json(path: impl AsRef<Path>) -> Result<InteractionGraph, IoError> {
    let path = path.as_ref();
    let content = read_to_string(path)?;
    let doc: AdjacencyDoc =
        serde_json::from_str(&content).map_err(|e| parse_error(path, &content, &e))?;
    let invalid = |message: String| IoError::InvalidData {
        path: path.to_path_buf(),
        message,
    };
    let edges = doc
        .edges
        .into_iter()
        .map(|edge| {
            Ok((
                SpeakerId::new(edge.a).map_err(|e| invalid(e.to_string()))?,
                SpeakerId::new(edge.b).map_err(|e| invalid(e.to_string()))?,
                edge.weight,
            ))
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let mut graph =
        InteractionGraph::from_weighted_edges(edges).map_err(|e| invalid(e.to_string()))?;
    for node in doc.nodes {
        graph.add_node(&SpeakerId::new(node).map_err(|e| invalid(e.to_string()))?);
    }
    Ok(graph)
}
