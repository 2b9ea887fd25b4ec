//! Graphviz export for human inspection (write-only).

use std::fmt::Write as _;

use super::{FormalSum, Graph, Slot, VertexKind};

/// Renders one graph as a `digraph` body with the given name.
pub fn graph_to_dot(g: &Graph, name: &str) -> String {
    let mut s = String::new();
    writeln!(s, "digraph {name} {{").unwrap();
    let rank: Vec<Option<usize>> = {
        let mut r = vec![None; g.vertices.len()];
        for (i, &w) in g.white_order.iter().enumerate() {
            r[w] = Some(i + 1);
        }
        r
    };
    for (i, k) in g.vertices.iter().enumerate() {
        let (label, shape) = match *k {
            VertexKind::Vector { label, deriv } => (format!("X{label} v={deriv}"), "circle"),
            VertexKind::Connection { deriv } => (format!("∇ w={deriv}"), "triangle"),
            VertexKind::White { arity } => (format!("∘ u={arity} #{}", rank[i].unwrap_or(0)), "doublecircle"),
            VertexKind::Anchor => ("anchor".to_string(), "box"),
        };
        writeln!(s, "  v{i} [label=\"{label}\", shape={shape}];").unwrap();
    }
    for e in &g.edges {
        let lbl = match e.slot {
            Slot::Base(b) => format!(" [label=\"b{b}\"]"),
            Slot::Sym => String::new(),
        };
        writeln!(s, "  v{} -> v{}{lbl};", e.from, e.to).unwrap();
    }
    s.push_str("}\n");
    s
}

/// Renders every term of a formal sum as a separate digraph, with the
/// coefficient as a comment.
pub fn sum_to_dot(x: &FormalSum) -> String {
    let mut out = String::new();
    for (i, (k, c)) in x.iter().enumerate() {
        writeln!(out, "// coefficient {c}").unwrap();
        out.push_str(&graph_to_dot(k.graph(), &format!("term{i}")));
    }
    out
}
