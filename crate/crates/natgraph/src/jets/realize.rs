//! Tensor realisation of graphs: every vertex becomes its jet array, every
//! edge an index summed over `0..n`.
//!
//! Vertex tensors carry their indices in the order `[out, base₀, base₁,
//! sym…]` (base indices only for connection vertices):
//!
//! * `X_ℓ` with `v` inputs: `X_ℓ^a_{(s₁…s_v)}`;
//! * `∇` with `w` derivative inputs: `Γ^a_{bc,(s₁…s_w)}`;
//! * `∘` with `u` inputs: the generator array `ξ^a_{(s₁…s_u)}`.
//!
//! The edge into the anchor is the free output index; graphs without an
//! anchor contract to scalars (wheels close into traces).  Contraction is a
//! sparse join over vertices in breadth-first order, summing an index out
//! as soon as both of its endpoints have been absorbed.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use super::poly::{mono_degree, mono_factorial, mono_indices, Poly};
use super::JetData;
use crate::graph::{FormalSum, Graph, Slot, VertexKind};
use crate::rules::{LocalTerm, BOUNDARY_LABEL};
use crate::{Error, Result, Q};

/// The value of a realised formal sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Realized {
    /// Anchored sums: a vector in ℝⁿ.
    Vector(Vec<Q>),
    /// Anchor-free sums: a number.
    Scalar(Q),
}

impl Realized {
    pub fn is_zero(&self) -> bool {
        match self {
            Realized::Vector(v) => v.iter().all(Zero::is_zero),
            Realized::Scalar(s) => s.is_zero(),
        }
    }
}

/// Sparse entries of a symmetric derivative array, with all orderings of
/// the derivative indices spelled out.
fn array_entries(prefix: &[usize], p: &Poly<Q>, degree: usize, out: &mut Vec<(Vec<usize>, Q)>) {
    for (m, c) in &p.terms {
        if mono_degree(m) != degree {
            continue;
        }
        let v = c * mono_factorial(m);
        let idx = mono_indices(m);
        for perm in distinct_permutations(&idx) {
            let mut key = prefix.to_vec();
            key.extend(perm);
            out.push((key, v.clone()));
        }
    }
}

/// All distinct orderings of a sorted multiset.
pub fn distinct_permutations(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = sorted.to_vec();
    loop {
        out.push(cur.clone());
        // Next lexicographic permutation.
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Tensor entries of one vertex kind.
fn vertex_entries(kind: VertexKind, data: &JetData, xi: Option<&[Poly<Q>]>) -> Result<Vec<(Vec<usize>, Q)>> {
    let mut out = Vec::new();
    match kind {
        VertexKind::Vector { label, deriv } => {
            let comps =
                data.fields.get(&label).ok_or_else(|| Error::Domain(format!("jet data lacks field X{label}")))?;
            if deriv as usize > data.order {
                return Err(Error::Domain(format!("jet order {} below derivative order {deriv}", data.order)));
            }
            for (a, p) in comps.iter().enumerate() {
                array_entries(&[a], p, deriv as usize, &mut out);
            }
        }
        VertexKind::Connection { deriv } => {
            let conn = data.connection.as_ref().ok_or_else(|| Error::Domain("jet data lacks a connection".into()))?;
            if deriv as usize > data.order {
                return Err(Error::Domain(format!("jet order {} below derivative order {deriv}", data.order)));
            }
            for (k, p) in conn {
                array_entries(k, p, deriv as usize, &mut out);
            }
        }
        VertexKind::White { arity } => {
            let xi = xi.ok_or_else(|| Error::Domain("white vertices need a generator".into()))?;
            for (a, p) in xi.iter().enumerate() {
                array_entries(&[a], p, arity as usize, &mut out);
            }
        }
        VertexKind::Anchor => {}
    }
    Ok(out)
}

/// Contracts the network of all vertices not marked `free`; edges touching
/// free vertices stay open, in the order of `free_edges`.
fn contract(
    g: &Graph,
    is_free: &[bool],
    free_edges: &[usize],
    data: &JetData,
    xi: Option<&[Poly<Q>]>,
) -> Result<BTreeMap<Vec<usize>, Q>> {
    let nv = g.vertices.len();
    // Edge ids at each tensor position.
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for v in 0..nv {
        if is_free[v] {
            continue;
        }
        let kind = g.vertices[v];
        let out_edge =
            g.edges.iter().position(|e| e.from == v).ok_or_else(|| Error::Domain("vertex without output".into()))?;
        let mut pos = vec![out_edge];
        if kind.base_slots() == 2 {
            for b in 0..2u8 {
                let e = g.edges.iter().position(|e| e.to == v && e.slot == Slot::Base(b));
                pos.push(e.ok_or_else(|| Error::Domain("open base slot".into()))?);
            }
        }
        pos.extend(g.edges.iter().enumerate().filter(|(_, e)| e.to == v && e.slot == Slot::Sym).map(|(i, _)| i));
        positions[v] = pos;
    }
    let mut kind_cache: HashMap<VertexKind, std::sync::Arc<Vec<(Vec<usize>, Q)>>> = HashMap::new();
    // Order: breadth-first over the undirected structure.
    let mut order = Vec::new();
    let mut seen = is_free.to_vec();
    for start in 0..nv {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for e in &g.edges {
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
    }
    let mut remaining_ends: Vec<usize> =
        g.edges.iter().map(|e| usize::from(!is_free[e.from]) + usize::from(!is_free[e.to])).collect();
    let mut active: Vec<usize> = Vec::new();
    let mut state: HashMap<Vec<usize>, Q> = HashMap::from([(Vec::new(), Q::from_integer(1.into()))]);
    for v in order {
        let entries = match kind_cache.get(&g.vertices[v]) {
            Some(e) => e.clone(),
            None => {
                let e = std::sync::Arc::new(vertex_entries(g.vertices[v], data, xi)?);
                kind_cache.insert(g.vertices[v], e.clone());
                e
            }
        };
        let pos = &positions[v];
        // Positions bound by the current state, and first occurrence of each
        // new edge (self-loops occupy two positions).
        let bound: Vec<(usize, usize)> =
            pos.iter().enumerate().filter_map(|(p, e)| active.iter().position(|a| a == e).map(|i| (p, i))).collect();
        let mut new_edges: Vec<usize> = Vec::new();
        let mut new_pos: Vec<usize> = Vec::new();
        let mut repeats: Vec<(usize, usize)> = Vec::new();
        for (p, e) in pos.iter().enumerate() {
            if active.contains(e) {
                continue;
            }
            if let Some(k) = new_edges.iter().position(|x| x == e) {
                repeats.push((p, new_pos[k]));
            } else {
                new_edges.push(*e);
                new_pos.push(p);
            }
        }
        let mut index: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (k, (vals, _)) in entries.iter().enumerate() {
            if repeats.iter().any(|&(p, q)| vals[p] != vals[q]) {
                continue;
            }
            index.entry(bound.iter().map(|&(p, _)| vals[p]).collect()).or_default().push(k);
        }
        for e in pos {
            remaining_ends[*e] -= 1;
        }
        let mut next_active: Vec<usize> = active.clone();
        next_active.extend(new_edges.iter().copied());
        let keep: Vec<bool> = next_active.iter().map(|e| remaining_ends[*e] > 0 || free_edges.contains(e)).collect();
        let mut next: HashMap<Vec<usize>, Q> = HashMap::new();
        for (key, val) in &state {
            let probe: Vec<usize> = bound.iter().map(|&(_, i)| key[i]).collect();
            let Some(list) = index.get(&probe) else {
                continue;
            };
            for &k in list {
                let (vals, x) = &entries[k];
                let full = key.iter().copied().chain(new_pos.iter().map(|&p| vals[p]));
                let nk: Vec<usize> = full.zip(&keep).filter(|(_, k)| **k).map(|(v, _)| v).collect();
                let e = next.entry(nk).or_insert_with(Q::zero);
                *e += val * x;
            }
        }
        next.retain(|_, v| !v.is_zero());
        active = next_active.into_iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| e).collect();
        state = next;
        if state.is_empty() {
            break;
        }
    }
    // Reorder the surviving keys to `free_edges`.
    let perm: Vec<Option<usize>> = free_edges.iter().map(|e| active.iter().position(|a| a == e)).collect();
    let mut out = BTreeMap::new();
    for (key, v) in state {
        if perm.iter().any(Option::is_none) {
            // The contraction vanished before every free edge was opened.
            break;
        }
        let k: Vec<usize> = perm.iter().map(|p| key[p.expect("checked")]).collect();
        out.insert(k, v);
    }
    Ok(out)
}

/// Realises one graph: `[a] ↦ value` for anchored graphs, `[] ↦ value` for
/// anchor-free ones.  White vertices need the generator `xi`.
pub fn realize_graph(g: &Graph, data: &JetData, xi: Option<&[Poly<Q>]>) -> Result<BTreeMap<Vec<usize>, Q>> {
    g.check()?;
    let is_free: Vec<bool> = g.vertices.iter().map(|k| *k == VertexKind::Anchor).collect();
    let free_edges: Vec<usize> = g.edges.iter().enumerate().filter(|(_, e)| is_free[e.to]).map(|(i, _)| i).collect();
    contract(g, &is_free, &free_edges, data, xi)
}

/// Realises a local rule term as the tensor `[out, port₀, port₁, …]`.
pub fn realize_local(t: &LocalTerm, data: &JetData, xi: &[Poly<Q>]) -> Result<BTreeMap<Vec<usize>, Q>> {
    let g = t.to_graph();
    let is_free: Vec<bool> = g
        .vertices
        .iter()
        .map(|k| match *k {
            VertexKind::Anchor => true,
            VertexKind::Vector { label, .. } => label >= BOUNDARY_LABEL,
            _ => false,
        })
        .collect();
    let anchor_edge =
        g.edges.iter().position(|e| g.vertices[e.to] == VertexKind::Anchor).expect("local graphs are anchored");
    let mut free_edges = vec![anchor_edge];
    for p in 0..t.ports.len() {
        let label = BOUNDARY_LABEL + p as u32;
        let e = g
            .edges
            .iter()
            .position(|e| g.vertices[e.from] == VertexKind::Vector { label, deriv: 0 })
            .expect("every port is wired");
        free_edges.push(e);
    }
    contract(&g, &is_free, &free_edges, data, Some(xi))
}

/// Realises a degree-zero formal sum.
pub fn realize(x: &FormalSum, data: &JetData) -> Result<Realized> {
    let mut anchored: Option<bool> = None;
    let mut vec_out = vec![Q::zero(); data.n];
    let mut scalar = Q::zero();
    for (class, c) in x.iter() {
        let g = class.graph();
        if g.degree() != 0 {
            return Err(Error::Domain("only degree-0 sums can be realised".into()));
        }
        let has_anchor = g.anchor().is_some();
        if anchored.is_some_and(|a| a != has_anchor) {
            return Err(Error::Domain("sum mixes anchored and anchor-free graphs".into()));
        }
        anchored = Some(has_anchor);
        for (k, v) in realize_graph(g, data, None)? {
            if has_anchor {
                vec_out[k[0]] += c * v;
            } else {
                scalar += c * v;
            }
        }
    }
    Ok(match anchored {
        Some(true) => Realized::Vector(vec_out),
        _ => Realized::Scalar(scalar),
    })
}
