//! Typed directed graphs, their canonical forms and formal sums.
//!
//! A graph has four vertex species:
//!
//! * vector-field vertices `X_i` carrying the `v`-th derivative of the
//!   `i`-th field (one output, `v` symmetric inputs),
//! * connection vertices `∇` carrying the `w`-th derivative of the
//!   Christoffel symbols (one output, an ordered pair of base inputs and `w`
//!   symmetric inputs),
//! * white vertices of arity `u ≥ 2` (one output, `u` symmetric inputs),
//! * at most one anchor (one input, no output) marking the value slot of a
//!   vector-valued operator.
//!
//! Every non-anchor vertex has exactly one outgoing edge and every input
//! slot is filled by exactly one edge, so the underlying shape is a
//! functional graph: the anchored component is a tree rooted at the anchor
//! and every other component carries exactly one directed cycle (a wheel).
//! White vertices carry an orientation — a linear order up to even
//! permutations — recorded as `white_order`.

pub mod canon;
pub mod dot;
pub mod json;
pub mod sum;

use std::collections::BTreeSet;
use std::fmt;

pub use canon::{canonicalize, CanonicalGraph, GraphClass};
pub use sum::FormalSum;

/// The species of a vertex together with its arity data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    /// `deriv`-th derivative of the vector field `X_label`.
    Vector { label: u32, deriv: u32 },
    /// `deriv`-th derivative of the connection.
    Connection { deriv: u32 },
    /// A generator of arity `arity` of the nilpotent jet algebra.
    White { arity: u32 },
    /// The output marker of vector-valued operators.
    Anchor,
}

impl VertexKind {
    /// Number of ordered base inputs (2 for connections, 0 otherwise).
    pub fn base_slots(&self) -> usize {
        match self {
            VertexKind::Connection { .. } => 2,
            _ => 0,
        }
    }

    /// Number of mutually symmetric inputs.
    pub fn sym_slots(&self) -> usize {
        match *self {
            VertexKind::Vector { deriv, .. } | VertexKind::Connection { deriv } => deriv as usize,
            VertexKind::White { arity } => arity as usize,
            VertexKind::Anchor => 1,
        }
    }

    /// Total number of input slots.
    pub fn in_slots(&self) -> usize {
        self.base_slots() + self.sym_slots()
    }

    /// Whether the vertex has an output edge.
    pub fn has_output(&self) -> bool {
        !matches!(self, VertexKind::Anchor)
    }

    pub fn is_white(&self) -> bool {
        matches!(self, VertexKind::White { .. })
    }

    /// Field vertices (vector fields and connections) are the black ones.
    pub fn is_black(&self) -> bool {
        matches!(self, VertexKind::Vector { .. } | VertexKind::Connection { .. })
    }

    /// The same kind with `extra` additional symmetric inputs; used when
    /// grafting derivative edges onto field vertices.
    pub fn with_extra_inputs(&self, extra: u32) -> VertexKind {
        match *self {
            VertexKind::Vector { label, deriv } => VertexKind::Vector { label, deriv: deriv + extra },
            VertexKind::Connection { deriv } => VertexKind::Connection { deriv: deriv + extra },
            VertexKind::White { arity } => VertexKind::White { arity: arity + extra },
            VertexKind::Anchor => VertexKind::Anchor,
        }
    }

    /// Derivative order of field vertices, arity for whites.
    pub fn order(&self) -> u32 {
        match *self {
            VertexKind::Vector { deriv, .. } | VertexKind::Connection { deriv } => deriv,
            VertexKind::White { arity } => arity,
            VertexKind::Anchor => 0,
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKind::Vector { label, deriv } => write!(f, "X{label}[{deriv}]"),
            VertexKind::Connection { deriv } => write!(f, "∇[{deriv}]"),
            VertexKind::White { arity } => write!(f, "∘[{arity}]"),
            VertexKind::Anchor => write!(f, "■"),
        }
    }
}

/// Input slot targeted by an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    /// Ordered base input `0` or `1` of a connection vertex.
    Base(u8),
    /// One of the mutually symmetric inputs.
    Sym,
}

/// A directed edge from the output of `from` into a slot of `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub slot: Slot,
}

/// A graph presentation: vertices are identified by their index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    pub vertices: Vec<VertexKind>,
    pub edges: Vec<Edge>,
    /// A representative linear order of the white vertices.
    pub white_order: Vec<usize>,
}

/// One structural defect reported by [`Graph::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    WhiteArity { vertex: usize, arity: u32 },
    EdgeOutOfRange { edge: usize },
    MissingOutput { vertex: usize },
    MultipleOutputs { vertex: usize },
    AnchorOutput { vertex: usize },
    MultipleAnchors,
    BadBaseSlot { edge: usize },
    OpenSlot { vertex: usize, slot: Slot },
    OverfilledSlot { vertex: usize, slot: Slot },
    WhiteOrder,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WhiteArity { vertex, arity } => {
                write!(f, "white arity < 2 (vertex {vertex} has arity {arity})")
            }
            Violation::EdgeOutOfRange { edge } => {
                write!(f, "edge {edge} references a missing vertex")
            }
            Violation::MissingOutput { vertex } => {
                write!(f, "vertex {vertex} has no outgoing edge")
            }
            Violation::MultipleOutputs { vertex } => {
                write!(f, "vertex {vertex} has more than one outgoing edge")
            }
            Violation::AnchorOutput { vertex } => write!(f, "anchor {vertex} has an outgoing edge"),
            Violation::MultipleAnchors => write!(f, "more than one anchor"),
            Violation::BadBaseSlot { edge } => {
                write!(f, "edge {edge} targets a base slot that does not exist")
            }
            Violation::OpenSlot { vertex, slot } => {
                write!(f, "open input slot ({slot:?} of vertex {vertex})")
            }
            Violation::OverfilledSlot { vertex, slot } => {
                write!(f, "input slot filled more than once ({slot:?} of vertex {vertex})")
            }
            Violation::WhiteOrder => {
                write!(f, "whiteOrder must list every white vertex exactly once")
            }
        }
    }
}

/// Adjacency view of a valid graph.
#[derive(Clone, Debug)]
pub(crate) struct Wiring {
    /// Target of the unique outgoing edge (none for the anchor).
    pub out: Vec<Option<(usize, Slot)>>,
    /// Sources feeding base slots 0 and 1.
    pub base: Vec<[Option<usize>; 2]>,
    /// Sources feeding symmetric slots, in edge order.
    pub sym: Vec<Vec<usize>>,
}

impl Wiring {
    pub fn new(g: &Graph) -> Wiring {
        let n = g.vertices.len();
        let mut w = Wiring { out: vec![None; n], base: vec![[None, None]; n], sym: vec![Vec::new(); n] };
        for e in &g.edges {
            w.out[e.from] = Some((e.to, e.slot));
            match e.slot {
                Slot::Base(i) => w.base[e.to][i as usize] = Some(e.from),
                Slot::Sym => w.sym[e.to].push(e.from),
            }
        }
        w
    }
}

impl Graph {
    /// The empty graph (the unit of scalar-valued families).
    pub fn empty() -> Graph {
        Graph::default()
    }

    /// Adds a vertex; white vertices are appended to the orientation order.
    pub fn add_vertex(&mut self, kind: VertexKind) -> usize {
        let id = self.vertices.len();
        self.vertices.push(kind);
        if kind.is_white() {
            self.white_order.push(id);
        }
        id
    }

    /// Adds the edge `from → slot of to`.
    pub fn connect(&mut self, from: usize, to: usize, slot: Slot) {
        self.edges.push(Edge { from, to, slot });
    }

    /// Number of white vertices, i.e. the cochain degree.
    pub fn degree(&self) -> usize {
        self.vertices.iter().filter(|k| k.is_white()).count()
    }

    pub fn anchor(&self) -> Option<usize> {
        self.vertices.iter().position(|k| *k == VertexKind::Anchor)
    }

    /// Index of the vector-field vertex with the given label.
    pub fn find_label(&self, label: u32) -> Option<usize> {
        self.vertices.iter().position(|k| matches!(k, VertexKind::Vector { label: l, .. } if *l == label))
    }

    /// Sorted field labels.
    pub fn labels(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .vertices
            .iter()
            .filter_map(|k| match k {
                VertexKind::Vector { label, .. } => Some(*label),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Number of connection vertices.
    pub fn nabla_count(&self) -> usize {
        self.vertices.iter().filter(|k| matches!(k, VertexKind::Connection { .. })).count()
    }

    /// Largest derivative order over field vertices.
    pub fn max_deriv(&self) -> u32 {
        self.vertices.iter().filter(|k| k.is_black()).map(|k| k.order()).max().unwrap_or(0)
    }

    /// Checks every structural invariant and returns all violations.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.vertices.len();
        let mut out = Vec::new();
        for (v, k) in self.vertices.iter().enumerate() {
            if let VertexKind::White { arity } = *k {
                if arity < 2 {
                    out.push(Violation::WhiteArity { vertex: v, arity });
                }
            }
        }
        if self.vertices.iter().filter(|k| **k == VertexKind::Anchor).count() > 1 {
            out.push(Violation::MultipleAnchors);
        }
        let mut outdeg = vec![0usize; n];
        let mut base_fill = vec![[0usize; 2]; n];
        let mut sym_fill = vec![0usize; n];
        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= n || e.to >= n {
                out.push(Violation::EdgeOutOfRange { edge: i });
                continue;
            }
            outdeg[e.from] += 1;
            match e.slot {
                Slot::Base(b) => {
                    if b > 1 || self.vertices[e.to].base_slots() == 0 {
                        out.push(Violation::BadBaseSlot { edge: i });
                    } else {
                        base_fill[e.to][b as usize] += 1;
                    }
                }
                Slot::Sym => sym_fill[e.to] += 1,
            }
        }
        for (v, k) in self.vertices.iter().enumerate() {
            if k.has_output() {
                match outdeg[v] {
                    0 => out.push(Violation::MissingOutput { vertex: v }),
                    1 => {}
                    _ => out.push(Violation::MultipleOutputs { vertex: v }),
                }
            } else if outdeg[v] > 0 {
                out.push(Violation::AnchorOutput { vertex: v });
            }
            for b in 0..k.base_slots() {
                let slot = Slot::Base(b as u8);
                match base_fill[v][b] {
                    0 => out.push(Violation::OpenSlot { vertex: v, slot }),
                    1 => {}
                    _ => out.push(Violation::OverfilledSlot { vertex: v, slot }),
                }
            }
            let cap = k.sym_slots();
            if sym_fill[v] < cap {
                out.push(Violation::OpenSlot { vertex: v, slot: Slot::Sym });
            } else if sym_fill[v] > cap {
                out.push(Violation::OverfilledSlot { vertex: v, slot: Slot::Sym });
            }
        }
        let whites: BTreeSet<usize> =
            self.vertices.iter().enumerate().filter(|(_, k)| k.is_white()).map(|(i, _)| i).collect();
        let listed: BTreeSet<usize> = self.white_order.iter().copied().collect();
        if listed != whites || self.white_order.len() != whites.len() {
            out.push(Violation::WhiteOrder);
        }
        out
    }

    /// Returns `Ok(())` or the full list of violations as an error.
    pub fn check(&self) -> crate::Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(crate::Error::InvalidGraph(v))
        }
    }

    /// Component index of every vertex (weak connectivity) and the count.
    pub fn component_ids(&self) -> (Vec<usize>, usize) {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            if a != b {
                parent[a] = b;
            }
        }
        let mut ids = vec![usize::MAX; n];
        let mut count = 0;
        let mut root_id = vec![usize::MAX; n];
        for v in 0..n {
            let r = find(&mut parent, v);
            if root_id[r] == usize::MAX {
                root_id[r] = count;
                count += 1;
            }
            ids[v] = root_id[r];
        }
        (ids, count)
    }

    /// Whether the graph is weakly connected (the empty graph is not).
    pub fn is_connected(&self) -> bool {
        self.component_ids().1 == 1
    }

    /// Weakly connected components, each with its induced white order.
    pub fn components(&self) -> Vec<Graph> {
        let (ids, count) = self.component_ids();
        let mut maps = vec![Vec::new(); count];
        let mut local = vec![0usize; self.vertices.len()];
        for (v, &c) in ids.iter().enumerate() {
            local[v] = maps[c].len();
            maps[c].push(v);
        }
        (0..count)
            .map(|c| {
                let vertices = maps[c].iter().map(|&v| self.vertices[v]).collect();
                let edges = self
                    .edges
                    .iter()
                    .filter(|e| ids[e.from] == c)
                    .map(|e| Edge { from: local[e.from], to: local[e.to], slot: e.slot })
                    .collect();
                let white_order = self.white_order.iter().filter(|&&w| ids[w] == c).map(|&w| local[w]).collect();
                Graph { vertices, edges, white_order }
            })
            .collect()
    }

    /// Disjoint union; the white order is that of `self` followed by `other`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.vertices.len();
        let mut g = self.clone();
        g.vertices.extend(other.vertices.iter().copied());
        g.edges.extend(other.edges.iter().map(|e| Edge { from: e.from + off, to: e.to + off, slot: e.slot }));
        g.white_order.extend(other.white_order.iter().map(|w| w + off));
        g
    }

    /// Applies `f` to every field label.
    pub fn map_labels(&self, f: impl Fn(u32) -> u32) -> Graph {
        let mut g = self.clone();
        for k in &mut g.vertices {
            if let VertexKind::Vector { label, .. } = k {
                *label = f(*label);
            }
        }
        g
    }

    /// Number of vertices lying on directed cycles.
    pub fn cycle_length(&self) -> usize {
        let w = Wiring::new(self);
        canon::cycle_vertices(&w).iter().filter(|b| **b).count()
    }
}

/// Parity (`+1`/`-1`) of a permutation given as a sequence of distinct ranks.
pub fn permutation_sign(perm: &[usize]) -> i32 {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut sign = 1;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}
