//! JSON interchange for graphs and formal sums.
//!
//! Graph schema:
//!
//! ```json
//! {"vertices":[{"id":0,"kind":"vector","label":"X1","derivOrder":0},
//!              {"id":1,"kind":"anchor"}],
//!  "edges":[{"from":0,"to":1,"slot":{"group":"sym","index":0}}],
//!  "whiteOrder":[]}
//! ```
//!
//! Vertex kinds are `vector` (with `label` and `derivOrder`), `connection`
//! (with `derivOrder`), `white` (with `arity`) and `anchor`.  Slots are
//! `{"group":"base","index":0|1}` or `{"group":"sym","index":k}`; symmetric
//! indices only need to be distinct within a vertex.  Formal sums wrap
//! graphs as `{"schemaVersion":1,"terms":[{"coeff":"-3/2","graph":{..}}]}`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Edge, FormalSum, Graph, Slot, VertexKind};
use crate::{Error, Result, Q};

/// Version tag written into every JSON document produced by the crate.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub struct VertexJson {
    pub id: i64,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub deriv_order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub arity: Option<u32>,
    /// Boundary port number for rule-template exports.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boundary: Option<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SlotJson {
    pub group: String,
    pub index: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub from: i64,
    pub to: i64,
    pub slot: SlotJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub struct GraphJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    #[serde(default)]
    pub white_order: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TermJson {
    pub coeff: String,
    pub graph: GraphJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub struct SumJson {
    pub schema_version: u32,
    pub terms: Vec<TermJson>,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

/// Parses a field label of the form `X<number>`.
pub fn parse_label(s: &str) -> Result<u32> {
    s.strip_prefix('X')
        .and_then(|r| r.parse::<u32>().ok())
        .ok_or_else(|| schema(format!("bad field label {s:?} (expected X<number>)")))
}

/// Parses a rational written as `p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|_| schema(format!("bad rational {s:?}")))
}

/// Serialises a graph; vertex ids are the vertex indices.
pub fn graph_to_json(g: &Graph) -> GraphJson {
    let vertices = g
        .vertices
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let mut v = VertexJson {
                id: i as i64,
                kind: String::new(),
                label: None,
                deriv_order: None,
                arity: None,
                boundary: None,
            };
            match *k {
                VertexKind::Vector { label, deriv } => {
                    v.kind = "vector".into();
                    v.label = Some(format!("X{label}"));
                    v.deriv_order = Some(deriv);
                }
                VertexKind::Connection { deriv } => {
                    v.kind = "connection".into();
                    v.deriv_order = Some(deriv);
                }
                VertexKind::White { arity } => {
                    v.kind = "white".into();
                    v.arity = Some(arity);
                }
                VertexKind::Anchor => v.kind = "anchor".into(),
            }
            v
        })
        .collect();
    let mut next_sym = vec![0u32; g.vertices.len()];
    let edges = g
        .edges
        .iter()
        .map(|e| {
            let slot = match e.slot {
                Slot::Base(i) => SlotJson { group: "base".into(), index: i as u32 },
                Slot::Sym => {
                    let idx = next_sym[e.to];
                    next_sym[e.to] += 1;
                    SlotJson { group: "sym".into(), index: idx }
                }
            };
            EdgeJson { from: e.from as i64, to: e.to as i64, slot }
        })
        .collect();
    GraphJson { vertices, edges, white_order: g.white_order.iter().map(|&w| w as i64).collect() }
}

/// Deserialises a graph.  Schema problems are errors; structural problems
/// (open slots, missing outputs, ...) are left to [`Graph::validate`].
pub fn graph_from_json(j: &GraphJson) -> Result<Graph> {
    let mut index = BTreeMap::new();
    let mut vertices = Vec::with_capacity(j.vertices.len());
    for v in &j.vertices {
        if index.insert(v.id, vertices.len()).is_some() {
            return Err(schema(format!("duplicate vertex id {}", v.id)));
        }
        let need = |o: Option<u32>, what: &str| {
            o.ok_or_else(|| schema(format!("vertex {} of kind {} lacks {what}", v.id, v.kind)))
        };
        let kind = match v.kind.as_str() {
            "vector" => {
                let label = v.label.as_deref().ok_or_else(|| schema(format!("vector vertex {} lacks label", v.id)))?;
                VertexKind::Vector { label: parse_label(label)?, deriv: need(v.deriv_order, "derivOrder")? }
            }
            "connection" => VertexKind::Connection { deriv: need(v.deriv_order, "derivOrder")? },
            "white" => VertexKind::White { arity: need(v.arity, "arity")? },
            "anchor" => VertexKind::Anchor,
            other => return Err(schema(format!("unknown vertex kind {other:?}"))),
        };
        vertices.push(kind);
    }
    let lookup = |id: i64| index.get(&id).copied().ok_or_else(|| schema(format!("unknown vertex id {id}")));
    let mut edges = Vec::with_capacity(j.edges.len());
    let mut used: BTreeSet<(usize, String, u32)> = BTreeSet::new();
    for e in &j.edges {
        let (from, to) = (lookup(e.from)?, lookup(e.to)?);
        let slot = match e.slot.group.as_str() {
            "base" => {
                if e.slot.index > 1 {
                    return Err(schema(format!("base slot index {} out of range", e.slot.index)));
                }
                Slot::Base(e.slot.index as u8)
            }
            "sym" => {
                if e.slot.index as usize >= vertices[to].sym_slots() {
                    return Err(schema(format!(
                        "symmetric slot index {} out of range for vertex {}",
                        e.slot.index, e.to
                    )));
                }
                Slot::Sym
            }
            other => return Err(schema(format!("unknown slot group {other:?}"))),
        };
        if !used.insert((to, e.slot.group.clone(), e.slot.index)) {
            return Err(schema(format!("slot {}:{} of vertex {} used twice", e.slot.group, e.slot.index, e.to)));
        }
        edges.push(Edge { from, to, slot });
    }
    let white_order = j.white_order.iter().map(|&w| lookup(w)).collect::<Result<Vec<_>>>()?;
    Ok(Graph { vertices, edges, white_order })
}

/// Serialises a formal sum using canonical presentations.
pub fn sum_to_json(s: &FormalSum) -> SumJson {
    SumJson {
        schema_version: SCHEMA_VERSION,
        terms: s.iter().map(|(k, c)| TermJson { coeff: c.to_string(), graph: graph_to_json(k.graph()) }).collect(),
    }
}

/// Reads a formal sum; also accepts a bare graph document.
pub fn sum_from_str(text: &str) -> Result<FormalSum> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    if value.get("terms").is_some() {
        let sj: SumJson = serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
        if sj.schema_version != SCHEMA_VERSION {
            return Err(schema(format!("unsupported schemaVersion {}", sj.schema_version)));
        }
        let mut out = FormalSum::new();
        for t in &sj.terms {
            let g = graph_from_json(&t.graph)?;
            out.add_graph(&g, &parse_rational(&t.coeff)?)?;
        }
        Ok(out)
    } else {
        let gj: GraphJson = serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
        let g = graph_from_json(&gj)?;
        FormalSum::from_graph(&g)
    }
}

/// Serialises a formal sum to a JSON string.
pub fn sum_to_string(s: &FormalSum) -> String {
    serde_json::to_string_pretty(&sum_to_json(s)).expect("serialisable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::canonicalize;

    #[test]
    fn round_trip_preserves_class() {
        let mut g = Graph::empty();
        let x = g.add_vertex(VertexKind::Vector { label: 1, deriv: 0 });
        let y = g.add_vertex(VertexKind::Vector { label: 2, deriv: 0 });
        let n = g.add_vertex(VertexKind::Connection { deriv: 0 });
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(x, n, Slot::Base(0));
        g.connect(y, n, Slot::Base(1));
        g.connect(n, a, Slot::Sym);
        let text = serde_json::to_string(&graph_to_json(&g)).unwrap();
        let back = graph_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(canonicalize(&g).unwrap(), canonicalize(&back).unwrap());
    }

    #[test]
    fn bad_kind_is_schema_error() {
        let text = r#"{"vertices":[{"id":0,"kind":"blob"}],"edges":[],"whiteOrder":[]}"#;
        assert!(matches!(sum_from_str(text), Err(Error::Schema(_))));
    }

    #[test]
    fn sum_round_trip() {
        let text = r#"{"vertices":[{"id":5,"kind":"vector","label":"X1","derivOrder":0},{"id":9,"kind":"anchor"}],
                       "edges":[{"from":5,"to":9,"slot":{"group":"sym","index":0}}],"whiteOrder":[]}"#;
        let s = sum_from_str(text).unwrap();
        let again = sum_from_str(&sum_to_string(&s)).unwrap();
        assert_eq!(s, again);
    }
}
