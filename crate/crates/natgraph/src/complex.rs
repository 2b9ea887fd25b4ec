//! Graph families, graded basis enumeration and the differential.
//!
//! The differential replaces one vertex at a time by its rule template and
//! sums over all vertices.  New white vertices are spliced into the
//! orientation order: a field vertex puts its new white first (sign `+1`);
//! the white of rank `i` (1-based) is replaced in place by its child and
//! parent whites, with sign `(−1)^{i+1}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Zero;
use rayon::prelude::*;

use crate::graph::canon::canonicalize_unchecked;
use crate::graph::{CanonicalGraph, Edge, FormalSum, Graph, GraphClass, Slot, VertexKind};
use crate::rules::{rule_for, RuleTemplate};
use crate::{Error, Result, Q};

/// The graph families whose complexes are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Vector-valued operators in `d` vector fields; disconnected graphs allowed.
    Bullet,
    /// [`Family::Bullet`] restricted to connected graphs.
    BulletConnected,
    /// Scalar operators in `d` vector fields: connected, no anchor.
    BulletWheel,
    /// Vector-valued operators in a connection and `d` vector fields, connected.
    BulletNabla1,
    /// Disconnected variant of [`Family::BulletNabla1`].
    BulletNabla,
    /// Scalar operators in a connection and `d` vector fields, connected.
    BulletNablaWheel,
    /// [`Family::BulletNabla1`] in the fields `X₀…X_d`, with `X₀` underived.
    BulletNablaTrace,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Bullet,
        Family::BulletConnected,
        Family::BulletWheel,
        Family::BulletNabla1,
        Family::BulletNabla,
        Family::BulletNablaWheel,
        Family::BulletNablaTrace,
    ];

    /// Command-line name.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Bullet => "bullet",
            Family::BulletConnected => "bullet-connected",
            Family::BulletWheel => "bullet-wheel",
            Family::BulletNabla1 => "bullet-nabla-1",
            Family::BulletNabla => "bullet-nabla",
            Family::BulletNablaWheel => "bullet-nabla-wheel",
            Family::BulletNablaTrace => "bullet-nabla-trace",
        }
    }

    /// Whether members carry the anchor (vector-valued operators).
    pub fn anchored(&self) -> bool {
        !matches!(self, Family::BulletWheel | Family::BulletNablaWheel)
    }

    /// Whether members may contain connection vertices.
    pub fn allows_nabla(&self) -> bool {
        matches!(self, Family::BulletNabla1 | Family::BulletNabla | Family::BulletNablaWheel | Family::BulletNablaTrace)
    }

    /// Whether members must be connected.
    pub fn connected(&self) -> bool {
        !matches!(self, Family::Bullet | Family::BulletNabla)
    }

    /// The field labels of the `d`-multilinear slice.
    pub fn labels(&self, d: usize) -> Vec<u32> {
        match self {
            Family::BulletNablaTrace => (0..=d as u32).collect(),
            _ => (1..=d as u32).collect(),
        }
    }

    /// Membership predicate for the `d`-multilinear slice (any degree).
    pub fn contains(&self, g: &Graph, d: usize) -> bool {
        if !g.validate().is_empty() {
            return false;
        }
        if g.labels() != self.labels(d) {
            return false;
        }
        if g.anchor().is_some() != self.anchored() {
            return false;
        }
        if !self.allows_nabla() && g.nabla_count() > 0 {
            return false;
        }
        if self.connected() {
            let empty_unit = !self.anchored() && g.vertices.is_empty();
            if !empty_unit && !g.is_connected() {
                return false;
            }
        }
        if *self == Family::BulletNablaTrace {
            let x0 = g.find_label(0).expect("labels checked");
            if g.vertices[x0] != (VertexKind::Vector { label: 0, deriv: 0 }) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown family {s:?}")))
    }
}

/// The canonical basis of one graded slice, sorted by canonical key.
#[derive(Clone, Debug)]
pub struct BasisSlice {
    pub family: Family,
    pub d: usize,
    pub m: usize,
    pub graphs: Vec<GraphClass>,
    index: HashMap<Arc<str>, usize>,
}

impl BasisSlice {
    fn new(family: Family, d: usize, m: usize, graphs: Vec<GraphClass>) -> BasisSlice {
        let index = graphs.iter().enumerate().map(|(i, g)| (Arc::from(g.key()), i)).collect();
        BasisSlice { family, d, m, graphs, index }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Position of the class with the given key.
    pub fn position(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// The basis element `i` as a formal sum.
    pub fn element(&self, i: usize) -> FormalSum {
        let mut s = FormalSum::new();
        s.add_class(self.graphs[i].clone(), Q::from_integer(1.into()));
        s
    }
}

/// All partitions of `total` into exactly `parts` positive parts, as
/// non-increasing sequences.
fn partitions(total: usize, parts: usize, max: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in (1..=max.min(total)).rev() {
        if total - first < parts - 1 {
            continue;
        }
        for mut rest in partitions(total - first, parts - 1, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Non-increasing sequences of length `parts` with entries `≥ 0` summing to `total`.
fn weak_partitions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, max: usize) -> Vec<Vec<usize>> {
        if parts == 0 {
            return if total == 0 { vec![Vec::new()] } else { Vec::new() };
        }
        let mut out = Vec::new();
        for first in (0..=max.min(total)).rev() {
            for mut rest in rec(total - first, parts - 1, first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    rec(total, parts, total)
}

/// All sequences of length `parts` with entries `≥ 0` summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Vertex multisets allowed by the port balance
/// `Σv + Σw + #∇ + Σ(u − 1) = #X − [anchor]`.
fn vertex_configurations(family: Family, d: usize, m: usize) -> Vec<Vec<VertexKind>> {
    let labels = family.labels(d);
    let anchor = usize::from(family.anchored());
    if labels.len() < anchor {
        return Vec::new();
    }
    let budget = labels.len() - anchor;
    let max_nabla = if family.allows_nabla() { budget } else { 0 };
    let free_labels: Vec<u32> =
        labels.iter().copied().filter(|&l| !(family == Family::BulletNablaTrace && l == 0)).collect();
    let mut out = Vec::new();
    for k in 0..=max_nabla {
        for e in m..=budget - k {
            for whites in partitions(e, m, e) {
                let r = budget - k - e;
                for split in 0..=r {
                    for xs in compositions(split, free_labels.len()) {
                        for ws in weak_partitions(r - split, k) {
                            let mut verts = Vec::new();
                            if anchor == 1 {
                                verts.push(VertexKind::Anchor);
                            }
                            if family == Family::BulletNablaTrace {
                                verts.push(VertexKind::Vector { label: 0, deriv: 0 });
                            }
                            for (l, v) in free_labels.iter().zip(&xs) {
                                verts.push(VertexKind::Vector { label: *l, deriv: *v as u32 });
                            }
                            verts.extend(ws.iter().map(|&w| VertexKind::Connection { deriv: w as u32 }));
                            verts.extend(whites.iter().map(|&u| VertexKind::White { arity: u as u32 + 1 }));
                            out.push(verts);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Every wiring of the given vertices (sources fill slot groups; symmetric
/// groups take subsets), canonicalised and filtered by the family.
fn wirings(family: Family, d: usize, verts: &[VertexKind]) -> Vec<GraphClass> {
    let sources: Vec<usize> = (0..verts.len()).filter(|&v| verts[v].has_output()).collect();
    // Slot groups: (vertex, slot, capacity).
    let mut groups: Vec<(usize, Slot, usize)> = Vec::new();
    for (v, k) in verts.iter().enumerate() {
        for b in 0..k.base_slots() {
            groups.push((v, Slot::Base(b as u8), 1));
        }
        if k.sym_slots() > 0 {
            groups.push((v, Slot::Sym, k.sym_slots()));
        }
    }
    let capacity: usize = groups.iter().map(|g| g.2).sum();
    if capacity != sources.len() {
        return Vec::new();
    }
    let mut base = Graph::empty();
    for k in verts {
        base.add_vertex(*k);
    }
    let mut found: BTreeMap<Arc<str>, GraphClass> = BTreeMap::new();
    let mut used = vec![false; verts.len()];
    let mut edges: Vec<Edge> = Vec::new();
    fill(&groups, 0, &sources, &mut used, &mut edges, &mut |edges| {
        let mut g = base.clone();
        g.edges = edges.to_vec();
        if family.connected() && !g.vertices.is_empty() && !g.is_connected() {
            return;
        }
        if let (CanonicalGraph::Class(c), _) = canonicalize_unchecked(&g) {
            if family.contains(c.graph(), d) {
                found.entry(Arc::from(c.key())).or_insert(c);
            }
        }
    });
    found.into_values().collect()
}

fn fill(
    groups: &[(usize, Slot, usize)],
    gi: usize,
    sources: &[usize],
    used: &mut Vec<bool>,
    edges: &mut Vec<Edge>,
    emit: &mut dyn FnMut(&[Edge]),
) {
    if gi == groups.len() {
        emit(edges);
        return;
    }
    let (v, slot, cap) = groups[gi];
    // Choose `cap` unused sources in increasing order.
    fn choose(
        groups: &[(usize, Slot, usize)],
        gi: usize,
        sources: &[usize],
        start: usize,
        left: usize,
        v: usize,
        slot: Slot,
        used: &mut Vec<bool>,
        edges: &mut Vec<Edge>,
        emit: &mut dyn FnMut(&[Edge]),
    ) {
        if left == 0 {
            fill(groups, gi + 1, sources, used, edges, emit);
            return;
        }
        for i in start..sources.len() {
            let s = sources[i];
            if used[s] {
                continue;
            }
            used[s] = true;
            edges.push(Edge { from: s, to: v, slot });
            choose(groups, gi, sources, i + 1, left - 1, v, slot, used, edges, emit);
            edges.pop();
            used[s] = false;
        }
    }
    choose(groups, gi, sources, 0, cap, v, slot, used, edges, emit);
}

/// The canonical basis of `(family, d, m)`: every graph of the family with
/// `m` white vertices, modulo isomorphism, without the zero classes.
pub fn enumerate_basis(family: Family, d: usize, m: usize) -> BasisSlice {
    static CACHE: OnceLock<Mutex<HashMap<(Family, usize, usize), Arc<BasisSlice>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().expect("basis cache").get(&(family, d, m)) {
        return (**b).clone();
    }
    let configs = vertex_configurations(family, d, m);
    let mut all: BTreeMap<Arc<str>, GraphClass> = BTreeMap::new();
    if !family.anchored() && d == 0 && m == 0 {
        if let (CanonicalGraph::Class(c), _) = canonicalize_unchecked(&Graph::empty()) {
            all.insert(Arc::from(c.key()), c);
        }
    }
    let parts: Vec<Vec<GraphClass>> = configs.par_iter().map(|v| wirings(family, d, v)).collect();
    for p in parts {
        for c in p {
            all.entry(Arc::from(c.key())).or_insert(c);
        }
    }
    let slice = BasisSlice::new(family, d, m, all.into_values().collect());
    cache.lock().expect("basis cache").insert((family, d, m), Arc::new(slice.clone()));
    slice
}

/// Instantiates one rule term at vertex `v` of `g`: returns the new graph
/// and the orientation sign of the white splice.
fn instantiate(g: &Graph, v: usize, t: &crate::rules::LocalTerm) -> (Graph, i32) {
    let mut out = Graph { vertices: g.vertices.clone(), edges: Vec::new(), white_order: Vec::new() };
    let mut map = Vec::with_capacity(t.vertices.len());
    for (i, k) in t.vertices.iter().enumerate() {
        if i == 0 {
            out.vertices[v] = *k;
            map.push(v);
        } else {
            map.push(out.vertices.len());
            out.vertices.push(*k);
        }
    }
    let root = map[t.root];
    let base_ports = g.vertices[v].base_slots();
    let mut next_sym = base_ports;
    for e in &g.edges {
        if e.to == v {
            let port = match e.slot {
                Slot::Base(b) => b as usize,
                Slot::Sym => {
                    next_sym += 1;
                    next_sym - 1
                }
            };
            let (iv, slot) = t.ports[port];
            let from = if e.from == v { root } else { e.from };
            out.edges.push(Edge { from, to: map[iv], slot });
        } else if e.from == v {
            out.edges.push(Edge { from: root, to: e.to, slot: e.slot });
        } else {
            out.edges.push(*e);
        }
    }
    if let Some((c, p, s)) = t.inner {
        out.edges.push(Edge { from: map[c], to: map[p], slot: s });
    }
    let new_whites: Vec<usize> = t.white_rank.iter().map(|&i| map[i]).collect();
    let mut sign = 1;
    if g.vertices[v].is_white() {
        let pos = g.white_order.iter().position(|&w| w == v).expect("white is ordered");
        for (i, &w) in g.white_order.iter().enumerate() {
            if i == pos {
                out.white_order.extend(new_whites.iter().copied());
            } else {
                out.white_order.push(w);
            }
        }
        if pos % 2 == 1 {
            sign = -1;
        }
    } else {
        out.white_order.extend(new_whites.iter().copied());
        out.white_order.extend(g.white_order.iter().copied());
    }
    (out, sign)
}

/// The differential of a single graph.
pub fn differential_graph(g: &Graph) -> Result<FormalSum> {
    g.check()?;
    let mut out = FormalSum::new();
    for (v, k) in g.vertices.iter().enumerate() {
        if *k == VertexKind::Anchor {
            continue;
        }
        let rule: Arc<RuleTemplate> = rule_for(*k)?;
        for t in &rule.terms {
            let (h, sign) = instantiate(g, v, t);
            let c = if sign > 0 { t.coeff.clone() } else { -t.coeff.clone() };
            out.add_graph_unchecked(&h, &c);
        }
    }
    Ok(out)
}

/// The differential of a formal sum whose graphs share one degree and lie
/// in `family` (for some multilinearity).
pub fn differential(x: &FormalSum, family: Family) -> Result<FormalSum> {
    let mut degree = None;
    for (k, _) in x.iter() {
        let g = k.graph();
        let d = if family == Family::BulletNablaTrace { g.labels().len().saturating_sub(1) } else { g.labels().len() };
        if !family.contains(g, d) {
            return Err(Error::Domain(format!("graph {} is not in family {family}", k.key())));
        }
        if degree.is_some_and(|m| m != g.degree()) {
            return Err(Error::Domain("mixed-degree input to the differential".into()));
        }
        degree = Some(g.degree());
    }
    differential_unchecked(x)
}

/// The differential of an arbitrary formal sum (no family checks).
pub fn differential_unchecked(x: &FormalSum) -> Result<FormalSum> {
    let terms: Vec<(&GraphClass, &Q)> = x.iter().collect();
    let parts: Vec<Result<FormalSum>> =
        terms.par_iter().map(|(k, c)| differential_graph(k.graph()).map(|s| s.scaled(c))).collect();
    let mut out = FormalSum::new();
    for p in parts {
        out.add_scaled(&p?, &Q::from_integer(1.into()));
    }
    Ok(out)
}

/// One nonzero residue of `δ²`.
#[derive(Clone, Debug)]
pub struct D2Failure {
    pub degree: usize,
    pub graph: GraphClass,
    pub residue: FormalSum,
}

/// Outcome of the `δ² = 0` check over the degree-0 and degree-1 slices.
#[derive(Clone, Debug)]
pub struct D2Report {
    pub family: Family,
    pub d: usize,
    pub checked: usize,
    pub failures: Vec<D2Failure>,
}

impl D2Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Computes `δ(δ(G))` for every basis graph of degree 0 and 1.
pub fn d_squared_zero(family: Family, d: usize) -> Result<D2Report> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for m in 0..=1 {
        let basis = enumerate_basis(family, d, m);
        let results: Vec<Result<Option<D2Failure>>> = basis
            .graphs
            .par_iter()
            .map(|c| {
                let once = differential_graph(c.graph())?;
                let twice = differential_unchecked(&once)?;
                Ok((!twice.is_empty()).then(|| D2Failure { degree: m, graph: c.clone(), residue: twice }))
            })
            .collect();
        checked += basis.len();
        for r in results {
            if let Some(f) = r? {
                failures.push(f);
            }
        }
    }
    Ok(D2Report { family, d, checked, failures })
}

/// Splits `δ(x)` by the change in the number of connection vertices.
pub fn bigrade_split(x: &FormalSum) -> Result<BTreeMap<i64, FormalSum>> {
    let mut out: BTreeMap<i64, FormalSum> = BTreeMap::new();
    for (k, c) in x.iter() {
        let before = k.graph().nabla_count() as i64;
        for (k2, c2) in differential_graph(k.graph())?.iter() {
            let delta = k2.graph().nabla_count() as i64 - before;
            out.entry(delta).or_default().add_class(k2.clone(), c * c2);
        }
    }
    out.retain(|_, s| !s.is_empty());
    Ok(out)
}

/// Number of vertices on the wheel of an anchor-free connected graph.
pub fn wheel_length(g: &Graph) -> usize {
    g.cycle_length()
}

/// Sum of coefficients, used by tests of sign patterns.
pub fn coefficient_total(x: &FormalSum) -> Q {
    x.iter().fold(Q::zero(), |acc, (_, c)| acc + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("nope".parse::<Family>().is_err());
    }

    #[test]
    fn partition_helpers() {
        assert_eq!(partitions(4, 2, 4), vec![vec![3, 1], vec![2, 2]]);
        assert_eq!(weak_partitions(2, 2), vec![vec![2, 0], vec![1, 1]]);
        assert_eq!(compositions(2, 2).len(), 3);
    }

    #[test]
    fn small_slices() {
        assert_eq!(enumerate_basis(Family::Bullet, 1, 0).len(), 1);
        assert_eq!(enumerate_basis(Family::Bullet, 2, 0).len(), 4);
        assert_eq!(enumerate_basis(Family::BulletNabla1, 2, 0).len(), 4);
        assert_eq!(enumerate_basis(Family::BulletWheel, 0, 0).len(), 1);
        assert_eq!(enumerate_basis(Family::Bullet, 0, 0).len(), 0);
    }

    #[test]
    fn differential_of_chain() {
        let mut g = Graph::empty();
        let x = g.add_vertex(VertexKind::Vector { label: 1, deriv: 0 });
        let y = g.add_vertex(VertexKind::Vector { label: 2, deriv: 1 });
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(x, y, Slot::Sym);
        g.connect(y, a, Slot::Sym);
        let dg = differential_graph(&g).unwrap();
        let mut h = Graph::empty();
        let x = h.add_vertex(VertexKind::Vector { label: 1, deriv: 0 });
        let y = h.add_vertex(VertexKind::Vector { label: 2, deriv: 0 });
        let w = h.add_vertex(VertexKind::White { arity: 2 });
        let a = h.add_vertex(VertexKind::Anchor);
        h.connect(x, w, Slot::Sym);
        h.connect(y, w, Slot::Sym);
        h.connect(w, a, Slot::Sym);
        assert_eq!(dg, FormalSum::from_graph(&h).unwrap());
        assert_eq!(dg.coeff_of(&h), q(1));
    }
}
