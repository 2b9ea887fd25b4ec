//! Canonical forms of oriented graphs.
//!
//! Because every non-anchor vertex has exactly one outgoing edge, each
//! component is either a tree hanging from the anchor or a single directed
//! cycle with trees hanging from it.  This structure admits a direct
//! canonical encoding instead of a general backtracking search:
//!
//! * a tree vertex is encoded by its kind, the codes of its two ordered
//!   base children (connections only) and the *sorted* codes of its
//!   symmetric children;
//! * a cycle vertex is encoded the same way, except that the slot fed by its
//!   cycle predecessor carries a marker; the component code is the
//!   lexicographically least rotation of the cycle's code sequence;
//! * the graph key is the sorted concatenation of component codes.
//!
//! The canonical white order is the order in which a traversal guided by
//! these codes meets the white vertices.  The automorphism group is
//! generated by swaps of identical symmetric siblings, swaps of identical
//! components and rotations of periodic cycles; the class is zero exactly
//! when one of these generators permutes the whites oddly.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::sync::Arc;

#[cfg(test)]
use super::Slot;
use super::{permutation_sign, Edge, Graph, VertexKind, Wiring};

/// A non-zero isomorphism class with its canonical representative.
///
/// Equality and ordering use the key only.
#[derive(Clone, Debug)]
pub struct GraphClass {
    key: Arc<str>,
    graph: Arc<Graph>,
}

impl GraphClass {
    pub fn key(&self) -> &str {
        &self.key
    }

    /// The canonical presentation (its white order is the canonical one).
    pub fn graph(&self) -> &Graph {
        &self.graph
    }
}

impl PartialEq for GraphClass {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for GraphClass {}
impl PartialOrd for GraphClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for GraphClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}
impl std::hash::Hash for GraphClass {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

/// Result of canonicalisation: either a class or the distinguished zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalGraph {
    /// The graph has an automorphism acting oddly on its white vertices.
    Zero,
    Class(GraphClass),
}

impl CanonicalGraph {
    pub fn is_zero(&self) -> bool {
        matches!(self, CanonicalGraph::Zero)
    }

    /// The key of a class; `None` for zero.
    pub fn key(&self) -> Option<&str> {
        match self {
            CanonicalGraph::Zero => None,
            CanonicalGraph::Class(c) => Some(c.key()),
        }
    }

    pub fn class(&self) -> Option<&GraphClass> {
        match self {
            CanonicalGraph::Zero => None,
            CanonicalGraph::Class(c) => Some(c),
        }
    }
}

/// Canonicalises a graph, returning its class and the sign relating the
/// given white order to the canonical one.  Zero classes carry sign `+1`.
pub fn canonicalize(g: &Graph) -> crate::Result<(CanonicalGraph, i32)> {
    g.check()?;
    Ok(canonicalize_unchecked(g))
}

/// [`canonicalize`] without structural validation; the caller guarantees
/// that `g` is valid.
pub(crate) fn canonicalize_unchecked(g: &Graph) -> (CanonicalGraph, i32) {
    Canon::new(g).run()
}

/// Marks vertices lying on directed cycles.
pub(crate) fn cycle_vertices(w: &Wiring) -> Vec<bool> {
    let n = w.out.len();
    let mut state = vec![0u8; n];
    let mut on_cycle = vec![false; n];
    for s in 0..n {
        if state[s] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut x = s;
        loop {
            if state[x] == 1 {
                let start = path.iter().position(|&p| p == x).expect("vertex on current path");
                for &p in &path[start..] {
                    on_cycle[p] = true;
                }
                break;
            }
            if state[x] == 2 {
                break;
            }
            state[x] = 1;
            path.push(x);
            match w.out[x] {
                Some((t, _)) => x = t,
                None => break,
            }
        }
        for p in path {
            state[p] = 2;
        }
    }
    on_cycle
}

fn kind_token(k: &VertexKind, s: &mut String) {
    match *k {
        VertexKind::Vector { label, deriv } => write!(s, "X{label}d{deriv}").unwrap(),
        VertexKind::Connection { deriv } => write!(s, "N{deriv}").unwrap(),
        VertexKind::White { arity } => write!(s, "W{arity}").unwrap(),
        VertexKind::Anchor => s.push('A'),
    }
}

const MARK: &str = "*";

struct Canon<'a> {
    g: &'a Graph,
    w: Wiring,
    on_cycle: Vec<bool>,
    /// For a cycle vertex: its predecessor on the cycle.
    pred: Vec<Option<usize>>,
    code: Vec<String>,
    whites: Vec<usize>,
    /// Non-cycle children in canonical visiting order.
    order: Vec<Vec<usize>>,
    zero: bool,
}

enum Comp {
    Tree(usize),
    Cycle { seq: Vec<usize>, start: usize },
}

impl<'a> Canon<'a> {
    fn new(g: &'a Graph) -> Self {
        let w = Wiring::new(g);
        let n = g.vertices.len();
        let on_cycle = cycle_vertices(&w);
        let mut pred = vec![None; n];
        for v in 0..n {
            if on_cycle[v] {
                let (t, _) = w.out[v].expect("cycle vertices have outputs");
                pred[t] = Some(v);
            }
        }
        Canon {
            g,
            w,
            on_cycle,
            pred,
            code: vec![String::new(); n],
            whites: vec![0; n],
            order: vec![Vec::new(); n],
            zero: false,
        }
    }

    /// Computes the code of `v` and of its hanging subtrees.
    fn encode(&mut self, v: usize) {
        let kind = self.g.vertices[v];
        let marked = self.pred[v];
        let mut base_codes: [Option<String>; 2] = [None, None];
        let mut order = Vec::new();
        let mut whites = usize::from(kind.is_white());
        for b in 0..kind.base_slots() {
            let c = self.w.base[v][b].expect("valid graph fills base slots");
            if Some(c) == marked {
                base_codes[b] = Some(MARK.to_string());
            } else {
                self.encode(c);
                whites += self.whites[c];
                base_codes[b] = Some(self.code[c].clone());
                order.push(c);
            }
        }
        let mut sym: Vec<usize> = Vec::with_capacity(self.w.sym[v].len());
        let mut has_mark = false;
        for &c in &self.w.sym[v].clone() {
            if Some(c) == marked && !has_mark {
                has_mark = true;
                continue;
            }
            self.encode(c);
            whites += self.whites[c];
            sym.push(c);
        }
        sym.sort_by(|&a, &b| self.code[a].cmp(&self.code[b]));
        for pair in sym.windows(2) {
            if self.code[pair[0]] == self.code[pair[1]] && self.whites[pair[0]] % 2 == 1 {
                self.zero = true;
            }
        }
        let mut s = String::from("(");
        kind_token(&kind, &mut s);
        if kind.base_slots() > 0 {
            s.push('[');
            for c in base_codes.iter().flatten() {
                s.push_str(c);
            }
            s.push(']');
        }
        s.push('{');
        if has_mark {
            s.push_str(MARK);
        }
        for &c in &sym {
            s.push_str(&self.code[c]);
        }
        s.push_str("})");
        order.extend(sym);
        self.code[v] = s;
        self.whites[v] = whites;
        self.order[v] = order;
    }

    fn run(mut self) -> (CanonicalGraph, i32) {
        let n = self.g.vertices.len();
        let mut comps: Vec<(String, usize, Comp)> = Vec::new();
        if let Some(a) = self.g.anchor() {
            self.encode(a);
            comps.push((self.code[a].clone(), self.whites[a], Comp::Tree(a)));
        }
        let mut done = vec![false; n];
        for s in 0..n {
            if !self.on_cycle[s] || done[s] {
                continue;
            }
            let mut seq = vec![s];
            done[s] = true;
            let mut x = self.w.out[s].unwrap().0;
            while x != s {
                seq.push(x);
                done[x] = true;
                x = self.w.out[x].unwrap().0;
            }
            for &c in &seq {
                self.encode(c);
            }
            let len = seq.len();
            let codes: Vec<&str> = seq.iter().map(|&c| self.code[c].as_str()).collect();
            let rot_cmp = |a: usize, b: usize| -> Ordering {
                for i in 0..len {
                    match codes[(a + i) % len].cmp(codes[(b + i) % len]) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            };
            let start = (1..len).fold(0, |best, r| if rot_cmp(r, best) == Ordering::Less { r } else { best });
            let period =
                (1..=len).find(|&p| len % p == 0 && (0..len).all(|i| codes[i] == codes[(i + p) % len])).unwrap();
            let total: usize = seq.iter().map(|&c| self.whites[c]).sum();
            if period < len {
                let segment = total / (len / period);
                if segment * (len / period - 1) % 2 == 1 {
                    self.zero = true;
                }
            }
            let mut code = String::from("<");
            for i in 0..len {
                code.push_str(codes[(start + i) % len]);
            }
            code.push('>');
            comps.push((code, total, Comp::Cycle { seq, start }));
        }
        comps.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in comps.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 % 2 == 1 {
                self.zero = true;
            }
        }
        if self.zero {
            return (CanonicalGraph::Zero, 1);
        }

        let mut visit = Vec::with_capacity(n);
        for (_, _, comp) in &comps {
            match comp {
                Comp::Tree(root) => self.emit(*root, &mut visit),
                Comp::Cycle { seq, start } => {
                    for i in 0..seq.len() {
                        self.emit(seq[(start + i) % seq.len()], &mut visit);
                    }
                }
            }
        }
        debug_assert_eq!(visit.len(), n);
        let mut pos = vec![0usize; n];
        for (i, &v) in visit.iter().enumerate() {
            pos[v] = i;
        }
        let vertices: Vec<VertexKind> = visit.iter().map(|&v| self.g.vertices[v]).collect();
        let mut edges: Vec<Edge> = Vec::with_capacity(n);
        for &v in &visit {
            if let Some((t, slot)) = self.w.out[v] {
                edges.push(Edge { from: pos[v], to: pos[t], slot });
            }
        }
        let white_order: Vec<usize> =
            visit.iter().filter(|&&v| self.g.vertices[v].is_white()).map(|&v| pos[v]).collect();
        // Rank of each white in the canonical order, read along the given order.
        let mut rank = vec![usize::MAX; n];
        for (r, &w) in white_order.iter().enumerate() {
            rank[visit[w]] = r;
        }
        let perm: Vec<usize> = self.g.white_order.iter().map(|&w| rank[w]).collect();
        let sign = permutation_sign(&perm);
        let key: String = comps.iter().map(|c| c.0.as_str()).collect();
        let graph = Graph { vertices, edges, white_order };
        (CanonicalGraph::Class(GraphClass { key: key.into(), graph: Arc::new(graph) }), sign)
    }

    fn emit(&self, v: usize, visit: &mut Vec<usize>) {
        visit.push(v);
        for &c in &self.order[v] {
            self.emit(c, visit);
        }
    }
}

/// Whether two graphs are isomorphic as oriented-graph classes (ignoring
/// orientation signs).
pub fn same_class(a: &Graph, b: &Graph) -> bool {
    canonicalize_unchecked(a).0 == canonicalize_unchecked(b).0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_v(g: &mut Graph, label: u32, deriv: u32) -> usize {
        g.add_vertex(VertexKind::Vector { label, deriv })
    }

    fn trace_graph(swap: bool) -> Graph {
        let mut g = Graph::empty();
        let (x, y);
        if swap {
            y = vec_v(&mut g, 2, 1);
            x = vec_v(&mut g, 1, 0);
        } else {
            x = vec_v(&mut g, 1, 0);
            y = vec_v(&mut g, 2, 1);
        }
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(y, y, Slot::Sym);
        g.connect(x, a, Slot::Sym);
        g
    }

    #[test]
    fn relabelled_trace_graph_has_same_key() {
        let (a, sa) = canonicalize(&trace_graph(false)).unwrap();
        let (b, sb) = canonicalize(&trace_graph(true)).unwrap();
        assert_eq!(a, b);
        assert_eq!((sa, sb), (1, 1));
    }

    #[test]
    fn chain_monomials_are_distinct() {
        let chain = |first: u32, second: u32| {
            let mut g = Graph::empty();
            let x = vec_v(&mut g, first, 0);
            let y = vec_v(&mut g, second, 1);
            let a = g.add_vertex(VertexKind::Anchor);
            g.connect(x, y, Slot::Sym);
            g.connect(y, a, Slot::Sym);
            g
        };
        let (a, _) = canonicalize(&chain(1, 2)).unwrap();
        let (b, _) = canonicalize(&chain(2, 1)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn odd_symmetric_whites_give_zero() {
        // X1 with two identical white cherries swapped by an automorphism.
        let mut g = Graph::empty();
        let x = vec_v(&mut g, 1, 2);
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(x, a, Slot::Sym);
        for _ in 0..2 {
            let w = g.add_vertex(VertexKind::White { arity: 2 });
            g.connect(w, x, Slot::Sym);
            for _ in 0..2 {
                let y = vec_v(&mut g, 2, 0);
                g.connect(y, w, Slot::Sym);
            }
        }
        assert!(g.validate().is_empty());
        assert_eq!(canonicalize(&g).unwrap(), (CanonicalGraph::Zero, 1));
    }

    #[test]
    fn periodic_white_wheel_parity() {
        // A wheel of L whites, each fed by one copy of X1: the rotation is
        // an L-cycle on whites, odd exactly when L is even.
        for len in 1..=4usize {
            let mut g = Graph::empty();
            let ws: Vec<usize> = (0..len).map(|_| g.add_vertex(VertexKind::White { arity: 2 })).collect();
            for i in 0..len {
                g.connect(ws[i], ws[(i + 1) % len], Slot::Sym);
                let x = vec_v(&mut g, 1, 0);
                g.connect(x, ws[i], Slot::Sym);
            }
            assert!(g.validate().is_empty());
            let zero = canonicalize(&g).unwrap().0.is_zero();
            assert_eq!(zero, len % 2 == 0, "length {len}");
        }
    }

    #[test]
    fn sign_flips_with_white_order() {
        let mut g = Graph::empty();
        let x = vec_v(&mut g, 1, 0);
        let y = vec_v(&mut g, 2, 0);
        let z = vec_v(&mut g, 3, 0);
        let w1 = g.add_vertex(VertexKind::White { arity: 2 });
        let w2 = g.add_vertex(VertexKind::White { arity: 2 });
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(x, w1, Slot::Sym);
        g.connect(y, w1, Slot::Sym);
        g.connect(w1, w2, Slot::Sym);
        g.connect(z, w2, Slot::Sym);
        g.connect(w2, a, Slot::Sym);
        let (c1, s1) = canonicalize(&g).unwrap();
        g.white_order.reverse();
        let (c2, s2) = canonicalize(&g).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(s1, -s2);
    }
}
