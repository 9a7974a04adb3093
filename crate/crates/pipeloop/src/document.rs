//! The JSON network document.
//!
//! ```json
//! {
//!   "nodes": [ {"id": 1, "inflow": 3.0}, {"id": 2, "inflow": -3.0} ],
//!   "edges": [ {"id": 1, "from": 1, "to": 2, "mu": 1.0}, ... ],
//!   "cycle_basis": [ [ {"edge": 1, "dir": 1}, {"edge": 3, "dir": -1} ], ... ],
//!   "reference_flow": [0.0, 0.0, 3.0],
//!   "x0": [1.01, 1.01]
//! }
//! ```
//!
//! Node ids must be exactly `1..=n`. Edge ids only need to be unique; edges
//! are renumbered `1..=m` in document order. An edge declared with
//! `from > to` is flipped, and any cycle directions and reference flow given
//! for it are negated along with it, so the document keeps its meaning.

use std::collections::HashMap;

use pipeloop_core::{CycleBasis, Error as CoreError, FlowNetwork, OrientedEdge};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: i64 },
    #[error("edge {edge} is a self-loop")]
    SelfLoop { edge: i64 },
    #[error("edge {edge} has non-positive coefficient mu = {mu}")]
    NonPositiveMu { edge: i64, mu: f64 },
    #[error("external inflows do not balance (sum = {sum:e})")]
    UnbalancedConsumption { sum: f64 },
    #[error(transparent)]
    Network(#[from] CoreError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DocumentError {
    /// Stable identifier used in error reports.
    pub fn code(&self) -> &'static str {
        match self {
            DocumentError::Malformed(_) => "malformed_document",
            DocumentError::DuplicateId { .. } => "duplicate_id",
            DocumentError::SelfLoop { .. } => "self_loop",
            DocumentError::NonPositiveMu { .. } => "non_positive_mu",
            DocumentError::UnbalancedConsumption { .. } => "unbalanced_consumption",
            DocumentError::Network(e) => crate::report::core_error_code(e),
            DocumentError::Io { .. } => "io_error",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: i64,
    inflow: f64,
}

fn default_mu() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: i64,
    from: i64,
    to: i64,
    #[serde(default = "default_mu")]
    mu: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawOrientedEdge {
    edge: i64,
    dir: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    nodes: Vec<RawNode>,
    edges: Vec<RawEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cycle_basis: Option<Vec<Vec<RawOrientedEdge>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_flow: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x0: Option<Vec<f64>>,
}

/// A loaded document with normalized orientation and numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDocument {
    pub network: FlowNetwork,
    pub cycle_basis: Option<CycleBasis>,
    pub reference_flow: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
}

pub fn parse_network(text: &str) -> Result<NetworkDocument, DocumentError> {
    let raw: RawDocument =
        serde_json::from_str(text).map_err(|e| DocumentError::Malformed(e.to_string()))?;
    from_raw(raw)
}

pub fn load(path: &str) -> Result<NetworkDocument, DocumentError> {
    let text = std::fs::read_to_string(path).map_err(|source| DocumentError::Io {
        path: path.to_string(),
        source,
    })?;
    parse_network(&text)
}

fn from_raw(raw: RawDocument) -> Result<NetworkDocument, DocumentError> {
    let n = raw.nodes.len();
    let mut inflow = vec![None; n];
    for node in &raw.nodes {
        if node.id < 1 || node.id as usize > n {
            return Err(DocumentError::Malformed(format!(
                "node id {} outside 1..={n}",
                node.id
            )));
        }
        let slot = &mut inflow[node.id as usize - 1];
        if slot.is_some() {
            return Err(DocumentError::DuplicateId {
                kind: "node",
                id: node.id,
            });
        }
        *slot = Some(node.inflow);
    }
    let inflow: Vec<f64> = inflow.into_iter().map(|w| w.unwrap_or(0.0)).collect();

    let mut index_of: HashMap<i64, usize> = HashMap::new();
    let mut flipped = Vec::with_capacity(raw.edges.len());
    let mut triples = Vec::with_capacity(raw.edges.len());
    for (pos, e) in raw.edges.iter().enumerate() {
        if index_of.insert(e.id, pos).is_some() {
            return Err(DocumentError::DuplicateId {
                kind: "edge",
                id: e.id,
            });
        }
        if e.from == e.to {
            return Err(DocumentError::SelfLoop { edge: e.id });
        }
        if !(e.mu > 0.0) || !e.mu.is_finite() {
            return Err(DocumentError::NonPositiveMu {
                edge: e.id,
                mu: e.mu,
            });
        }
        for v in [e.from, e.to] {
            if v < 1 || v as usize > n {
                return Err(DocumentError::Malformed(format!(
                    "edge {} references unknown node {v}",
                    e.id
                )));
            }
        }
        flipped.push(e.from > e.to);
        triples.push((e.from as usize, e.to as usize, e.mu));
    }

    let network = FlowNetwork::new(n, triples, inflow).map_err(|err| match err {
        CoreError::UnbalancedConsumption { sum } => DocumentError::UnbalancedConsumption { sum },
        other => DocumentError::Network(other),
    })?;

    let cycle_basis = raw
        .cycle_basis
        .map(|cycles| {
            cycles
                .iter()
                .enumerate()
                .map(|(c, cycle)| {
                    cycle
                        .iter()
                        .map(|oe| {
                            let pos = *index_of.get(&oe.edge).ok_or(DocumentError::Network(
                                CoreError::UnknownEdge {
                                    cycle: c + 1,
                                    edge: oe.edge.max(0) as usize,
                                },
                            ))?;
                            if oe.dir != 1 && oe.dir != -1 {
                                return Err(DocumentError::Malformed(format!(
                                    "cycle {} has direction {} (expected 1 or -1)",
                                    c + 1,
                                    oe.dir
                                )));
                            }
                            let dir = if flipped[pos] { -oe.dir } else { oe.dir };
                            Ok(OrientedEdge::new(pos + 1, dir))
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
                .map(CycleBasis::new)
        })
        .transpose()?;

    let reference_flow = match raw.reference_flow {
        Some(psi) => {
            if psi.len() != network.edge_count() {
                return Err(DocumentError::Network(CoreError::DimensionMismatch {
                    what: "reference_flow",
                    expected: network.edge_count(),
                    found: psi.len(),
                }));
            }
            Some(
                psi.iter()
                    .zip(&flipped)
                    .map(|(&p, &f)| if f { -p } else { p })
                    .collect(),
            )
        }
        None => None,
    };

    Ok(NetworkDocument {
        network,
        cycle_basis,
        reference_flow,
        x0: raw.x0,
    })
}

/// Serializes in normalized form: edges as stored, ids `1..=m`.
pub fn serialize(doc: &NetworkDocument) -> String {
    let net = &doc.network;
    let raw = RawDocument {
        nodes: net
            .inflow()
            .iter()
            .enumerate()
            .map(|(v, &w)| RawNode {
                id: v as i64 + 1,
                inflow: w,
            })
            .collect(),
        edges: net
            .edges()
            .iter()
            .map(|e| RawEdge {
                id: e.id as i64,
                from: e.tail as i64,
                to: e.head as i64,
                mu: e.mu,
            })
            .collect(),
        cycle_basis: doc.cycle_basis.as_ref().map(|b| {
            b.cycles()
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|oe| RawOrientedEdge {
                            edge: oe.edge as i64,
                            dir: oe.dir,
                        })
                        .collect()
                })
                .collect()
        }),
        reference_flow: doc.reference_flow.clone(),
        x0: doc.x0.clone(),
    };
    serde_json::to_string_pretty(&raw).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARALLEL: &str = r#"{
        "nodes": [{"id": 1, "inflow": 3}, {"id": 2, "inflow": -3}],
        "edges": [
            {"id": 1, "from": 1, "to": 2},
            {"id": 2, "from": 1, "to": 2, "mu": 1.0},
            {"id": 3, "from": 1, "to": 2, "mu": 1.0}
        ]
    }"#;

    #[test]
    fn parses_parallel_edges() {
        let doc = parse_network(PARALLEL).unwrap();
        assert_eq!(doc.network.vertex_count(), 2);
        assert_eq!(doc.network.edge_count(), 3);
        assert_eq!(doc.network.inflow(), &[3.0, -3.0]);
        assert!(doc.cycle_basis.is_none() && doc.reference_flow.is_none() && doc.x0.is_none());
    }

    #[test]
    fn zero_inflow_single_edge() {
        let doc = parse_network(
            r#"{"nodes": [{"id": 1, "inflow": 0}, {"id": 2, "inflow": 0}],
                "edges": [{"id": 1, "from": 1, "to": 2}]}"#,
        )
        .unwrap();
        assert_eq!(doc.network.inflow(), &[0.0, 0.0]);
    }

    #[test]
    fn input_errors() {
        let unbalanced = r#"{"nodes": [{"id": 1, "inflow": 1}, {"id": 2, "inflow": -2}],
                             "edges": [{"id": 1, "from": 1, "to": 2}]}"#;
        assert!(matches!(
            parse_network(unbalanced).unwrap_err(),
            DocumentError::UnbalancedConsumption { .. }
        ));
        let dup = r#"{"nodes": [{"id": 1, "inflow": 0}, {"id": 2, "inflow": 0}],
                      "edges": [{"id": 4, "from": 1, "to": 2}, {"id": 4, "from": 2, "to": 1}]}"#;
        assert!(matches!(
            parse_network(dup).unwrap_err(),
            DocumentError::DuplicateId {
                kind: "edge",
                id: 4
            }
        ));
        let selfloop = r#"{"nodes": [{"id": 1, "inflow": 0}, {"id": 2, "inflow": 0}],
                           "edges": [{"id": 1, "from": 2, "to": 2}]}"#;
        assert!(matches!(
            parse_network(selfloop).unwrap_err(),
            DocumentError::SelfLoop { edge: 1 }
        ));
        let mu = r#"{"nodes": [{"id": 1, "inflow": 0}, {"id": 2, "inflow": 0}],
                     "edges": [{"id": 1, "from": 1, "to": 2, "mu": -1}]}"#;
        assert!(matches!(
            parse_network(mu).unwrap_err(),
            DocumentError::NonPositiveMu { .. }
        ));
        let unknown_key = r#"{"nodes": [], "edges": [], "pumps": []}"#;
        assert_eq!(
            parse_network(unknown_key).unwrap_err().code(),
            "malformed_document"
        );
        assert_eq!(parse_network("{").unwrap_err().code(), "malformed_document");
    }

    #[test]
    fn flipped_edges_keep_their_meaning() {
        let text = r#"{
            "nodes": [{"id": 1, "inflow": 3}, {"id": 2, "inflow": -3}],
            "edges": [
                {"id": 10, "from": 1, "to": 2},
                {"id": 20, "from": 1, "to": 2},
                {"id": 30, "from": 2, "to": 1}
            ],
            "cycle_basis": [
                [{"edge": 10, "dir": 1}, {"edge": 30, "dir": 1}],
                [{"edge": 20, "dir": 1}, {"edge": 30, "dir": 1}]
            ],
            "reference_flow": [0, 0, -3]
        }"#;
        let doc = parse_network(text).unwrap();
        let e3 = doc.network.edges()[2];
        assert_eq!((e3.id, e3.tail, e3.head), (3, 1, 2));
        assert_eq!(doc.reference_flow.as_deref(), Some(&[0.0, 0.0, 3.0][..]));
        let basis = doc.cycle_basis.unwrap();
        assert_eq!(
            basis.cycles()[0],
            vec![OrientedEdge::new(1, 1), OrientedEdge::new(3, -1)]
        );
    }

    #[test]
    fn serialize_round_trip() {
        let text = r#"{
            "nodes": [{"id": 2, "inflow": -3}, {"id": 1, "inflow": 3}],
            "edges": [{"id": 7, "from": 2, "to": 1, "mu": 2.5}, {"id": 9, "from": 1, "to": 2}],
            "cycle_basis": [[{"edge": 7, "dir": 1}, {"edge": 9, "dir": 1}]],
            "x0": [0.5]
        }"#;
        let doc = parse_network(text).unwrap();
        let again = parse_network(&serialize(&doc)).unwrap();
        assert_eq!(doc, again);
        assert_eq!(serialize(&doc), serialize(&again));
    }
}
