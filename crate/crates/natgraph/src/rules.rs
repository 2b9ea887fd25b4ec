//! Local replacement rules defining the graph differential.
//!
//! A rule replaces one vertex by a linear combination of *local graphs*:
//! at most two internal vertices wired to the boundary ports of the
//! replaced vertex (its inputs and its output).  Port numbering:
//!
//! * connection vertices: port 0 is base input 0, port 1 is base input 1,
//!   ports `2..` are the symmetric derivative inputs;
//! * vector-field and white vertices: ports `0..` are the symmetric inputs.
//!
//! Three families of rules exist:
//!
//! * white vertices split into two whites (the bracket of the nilpotent jet
//!   algebra, without factorials);
//! * vector-field vertices produce one white and one field vertex (the
//!   polarised Lie derivative `[X, ξ]`);
//! * connection vertices produce `−∘` of arity `w + 2` plus two-vertex
//!   trees with one connection and one white vertex.  The cases `w ≤ 1` are
//!   written out; higher orders are derived by matching the tensor
//!   realisations of all candidate trees against the exact infinitesimal
//!   jet-group action on connection jets (see [`derive_connection_rule`]).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::canon::canonicalize_unchecked;
use crate::graph::json::{graph_to_json, GraphJson, VertexJson, SCHEMA_VERSION};
use crate::graph::{CanonicalGraph, Graph, Slot, VertexKind};
use crate::jets;
use crate::linalg::Rref;
use crate::{q, Error, Result, Q};

/// Field labels at or above this value denote boundary ports when a local
/// graph is rendered as an ordinary graph.
pub const BOUNDARY_LABEL: u32 = 1_000_000;

/// One local graph of a template with its coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalTerm {
    pub coeff: Q,
    /// Internal vertices (at most two).
    pub vertices: Vec<VertexKind>,
    /// The internal vertex whose output replaces the source's output.
    pub root: usize,
    /// Internal edge `(child, parent, slot)` for two-vertex terms.
    pub inner: Option<(usize, usize, Slot)>,
    /// Destination of every input port.
    pub ports: Vec<(usize, Slot)>,
    /// Internal white vertices in orientation order.
    pub white_rank: Vec<usize>,
}

/// A replacement rule: the image of one vertex kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTemplate {
    pub source: VertexKind,
    pub terms: Vec<LocalTerm>,
}

impl LocalTerm {
    /// Renders the term as an ordinary graph: port `p` becomes a vector
    /// vertex labelled `BOUNDARY_LABEL + p` and the output feeds an anchor.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::empty();
        for k in &self.vertices {
            g.vertices.push(*k);
        }
        g.white_order = self.white_rank.clone();
        if let Some((c, p, s)) = self.inner {
            g.connect(c, p, s);
        }
        for (p, &(v, s)) in self.ports.iter().enumerate() {
            let b = g.add_vertex(VertexKind::Vector { label: BOUNDARY_LABEL + p as u32, deriv: 0 });
            g.connect(b, v, s);
        }
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(self.root, a, Slot::Sym);
        g
    }
}

impl RuleTemplate {
    /// Number of input ports of the source vertex.
    pub fn port_count(&self) -> usize {
        self.source.in_slots()
    }

    /// The template as a map from canonical local-graph keys to
    /// coefficients (orientation signs folded in).  Two templates are equal
    /// as linear combinations iff their signatures coincide.
    pub fn signature(&self) -> BTreeMap<String, Q> {
        let mut out: BTreeMap<String, Q> = BTreeMap::new();
        for t in &self.terms {
            let (c, sign) = canonicalize_unchecked(&t.to_graph());
            if let CanonicalGraph::Class(k) = c {
                let e = out.entry(k.key().to_string()).or_insert_with(Q::zero);
                *e += if sign > 0 { t.coeff.clone() } else { -t.coeff.clone() };
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Checks that every term uses each port exactly once and respects
    /// arities.
    pub fn check_boundary(&self) -> bool {
        self.terms.iter().all(|t| {
            let g = t.to_graph();
            g.validate().is_empty() && t.ports.len() == self.port_count()
        })
    }

    /// JSON export: each term is a graph whose boundary vertices carry a
    /// `"boundary"` number (0 for the output, `p + 1` for input port `p`).
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                let g = t.to_graph();
                let mut j: GraphJson = graph_to_json(&g);
                for v in &mut j.vertices {
                    boundary_vertex(v);
                }
                serde_json::json!({ "coeff": t.coeff.to_string(), "graph": j })
            })
            .collect();
        serde_json::json!({
            "schemaVersion": SCHEMA_VERSION,
            "source": source_json(&self.source),
            "terms": terms,
        })
    }
}

fn source_json(k: &VertexKind) -> serde_json::Value {
    match *k {
        VertexKind::Vector { label, deriv } => {
            serde_json::json!({"kind": "vector", "label": format!("X{label}"), "derivOrder": deriv})
        }
        VertexKind::Connection { deriv } => {
            serde_json::json!({"kind": "connection", "derivOrder": deriv})
        }
        VertexKind::White { arity } => serde_json::json!({"kind": "white", "arity": arity}),
        VertexKind::Anchor => serde_json::json!({"kind": "anchor"}),
    }
}

fn boundary_vertex(v: &mut VertexJson) {
    let port = v.label.as_deref().and_then(|l| l.strip_prefix('X')).and_then(|n| n.parse::<u32>().ok());
    if let Some(n) = port.filter(|n| *n >= BOUNDARY_LABEL) {
        v.kind = "boundary".into();
        v.label = None;
        v.deriv_order = None;
        v.boundary = Some((n - BOUNDARY_LABEL) as i64 + 1);
    } else if v.kind == "anchor" {
        v.kind = "boundary".into();
        v.boundary = Some(0);
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Builds a two-vertex term: `child` feeds a symmetric or base slot of
/// `parent`; `child_ports` go to the child's symmetric slots, all other
/// ports to the parent's symmetric slots (unless overridden by `placed`).
fn tree_term(
    coeff: Q,
    child: VertexKind,
    parent: VertexKind,
    into: Slot,
    ports: Vec<(usize, Slot)>,
    white_rank: Vec<usize>,
) -> LocalTerm {
    LocalTerm { coeff, vertices: vec![child, parent], root: 1, inner: Some((0, 1, into)), ports, white_rank }
}

/// The white-vertex rule: a sum over `s + t = u + 1` of two-white trees,
/// one term per `t`-subset of the inputs given to the child white.
/// The parent white precedes the child in the orientation.
pub fn replace_white(u: u32) -> Result<RuleTemplate> {
    if u < 2 {
        return Err(Error::Domain(format!("white arity {u} < 2")));
    }
    let n = u as usize;
    let mut terms = Vec::new();
    for t in 2..=u {
        let s = u + 1 - t;
        if s < 2 {
            continue;
        }
        for sub in subsets(n, t as usize) {
            let ports = (0..n).map(|p| (if sub.contains(&p) { 0 } else { 1 }, Slot::Sym)).collect();
            terms.push(tree_term(
                Q::one(),
                VertexKind::White { arity: t },
                VertexKind::White { arity: s },
                Slot::Sym,
                ports,
                vec![1, 0],
            ));
        }
    }
    Ok(RuleTemplate { source: VertexKind::White { arity: u }, terms })
}

/// The vector-field rule for `X_label` with `v` derivative inputs.
///
/// `+∘(s)` with a child `X(u′)` receiving `u′` of the inputs, minus `X(u′)`
/// with a child `∘(s)` receiving `s` of the inputs (only for `u′ ≥ 1`),
/// summed over `s ≥ 2`, `s + u′ = v + 1`.
pub fn replace_vectorfield_labelled(label: u32, v: u32) -> RuleTemplate {
    let n = v as usize;
    let mut terms = Vec::new();
    for s in 2..=v + 1 {
        let up = v + 1 - s;
        let field = VertexKind::Vector { label, deriv: up };
        let white = VertexKind::White { arity: s };
        for sub in subsets(n, up as usize) {
            let ports = (0..n).map(|p| (if sub.contains(&p) { 0 } else { 1 }, Slot::Sym)).collect();
            terms.push(tree_term(Q::one(), field, white, Slot::Sym, ports, vec![1]));
        }
        if up >= 1 {
            for sub in subsets(n, s as usize) {
                let ports = (0..n).map(|p| (if sub.contains(&p) { 0 } else { 1 }, Slot::Sym)).collect();
                terms.push(tree_term(-Q::one(), white, field, Slot::Sym, ports, vec![0]));
            }
        }
    }
    RuleTemplate { source: VertexKind::Vector { label, deriv: v }, terms }
}

/// [`replace_vectorfield_labelled`] for the field `X1`.
pub fn replace_vectorfield(v: u32) -> RuleTemplate {
    replace_vectorfield_labelled(1, v)
}

fn single_white_term(coeff: Q, arity: u32) -> LocalTerm {
    LocalTerm {
        coeff,
        vertices: vec![VertexKind::White { arity }],
        root: 0,
        inner: None,
        ports: (0..arity as usize).map(|_| (0, Slot::Sym)).collect(),
        white_rank: vec![0],
    }
}

/// The written-out connection rules for `w ≤ 1`.
fn explicit_connection_rule(w: u32) -> Option<RuleTemplate> {
    let nabla0 = VertexKind::Connection { deriv: 0 };
    let w2 = VertexKind::White { arity: 2 };
    match w {
        0 => Some(RuleTemplate { source: nabla0, terms: vec![single_white_term(-Q::one(), 2)] }),
        1 => {
            // Ports: 0 = b, 1 = c, 2 = s.
            let terms = vec![
                // ∘(s, ∇(b, c))
                tree_term(
                    Q::one(),
                    nabla0,
                    w2,
                    Slot::Sym,
                    vec![(0, Slot::Base(0)), (0, Slot::Base(1)), (1, Slot::Sym)],
                    vec![1],
                ),
                // −∇(∘(s, b), c)
                tree_term(
                    -Q::one(),
                    w2,
                    nabla0,
                    Slot::Base(0),
                    vec![(0, Slot::Sym), (1, Slot::Base(1)), (0, Slot::Sym)],
                    vec![0],
                ),
                // −∇(b, ∘(s, c))
                tree_term(
                    -Q::one(),
                    w2,
                    nabla0,
                    Slot::Base(1),
                    vec![(1, Slot::Base(0)), (0, Slot::Sym), (0, Slot::Sym)],
                    vec![0],
                ),
                // −∘(s, b, c)
                single_white_term(-Q::one(), 3),
            ];
            Some(RuleTemplate { source: VertexKind::Connection { deriv: 1 }, terms })
        }
        _ => None,
    }
}

/// The connection rule for derivative order `w`: written out for `w ≤ 1`,
/// derived (and cached) for higher orders.
pub fn replace_connection(w: u32) -> Result<RuleTemplate> {
    if let Some(t) = explicit_connection_rule(w) {
        return Ok(t);
    }
    static CACHE: OnceLock<Mutex<BTreeMap<u32, Arc<RuleTemplate>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(t) = cache.lock().expect("rule cache").get(&w) {
        return Ok((**t).clone());
    }
    let t = derive_connection_rule(w, 2 * w as usize + 4)?;
    cache.lock().expect("rule cache").insert(w, Arc::new(t.clone()));
    Ok(t)
}

/// The rule for an arbitrary vertex kind (empty for the anchor).
pub fn rule_for(kind: VertexKind) -> Result<Arc<RuleTemplate>> {
    static CACHE: OnceLock<Mutex<BTreeMap<VertexKind, Arc<RuleTemplate>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(t) = cache.lock().expect("rule cache").get(&kind) {
        return Ok(t.clone());
    }
    let t = Arc::new(match kind {
        VertexKind::Vector { label, deriv } => replace_vectorfield_labelled(label, deriv),
        VertexKind::Connection { deriv } => replace_connection(deriv)?,
        VertexKind::White { arity } => replace_white(arity)?,
        VertexKind::Anchor => RuleTemplate { source: kind, terms: Vec::new() },
    });
    cache.lock().expect("rule cache").insert(kind, t.clone());
    Ok(t)
}

/// Slot groups available for boundary ports in a candidate tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Group {
    NablaBase(u8),
    NablaSym,
    WhiteSym,
}

/// One orbit of candidate local graphs under permutations of the
/// derivative ports: the shape, where `b` and `c` go, and how many
/// derivative ports each group receives.
#[derive(Clone, Debug)]
struct Candidate {
    terms: Vec<LocalTerm>,
}

/// All candidate orbits for the connection rule of order `w`.
fn connection_candidates(w: u32) -> Vec<Candidate> {
    let ports = w as usize + 2;
    let mut out = vec![Candidate { terms: vec![single_white_term(Q::one(), w + 2)] }];
    for wp in 0..w {
        let u = w + 1 - wp;
        let nabla = VertexKind::Connection { deriv: wp };
        let white = VertexKind::White { arity: u };
        // (nabla is parent?, slot of the child in the parent)
        let mut shapes: Vec<(bool, Slot)> = vec![(true, Slot::Base(0)), (true, Slot::Base(1)), (false, Slot::Sym)];
        if wp >= 1 {
            shapes.push((true, Slot::Sym));
        }
        for (nabla_parent, into) in shapes {
            let mut cap: BTreeMap<Group, usize> = BTreeMap::new();
            cap.insert(Group::NablaBase(0), 1);
            cap.insert(Group::NablaBase(1), 1);
            cap.insert(Group::NablaSym, wp as usize);
            cap.insert(Group::WhiteSym, u as usize);
            let taken = if nabla_parent {
                match into {
                    Slot::Base(i) => Group::NablaBase(i),
                    Slot::Sym => Group::NablaSym,
                }
            } else {
                Group::WhiteSym
            };
            *cap.get_mut(&taken).unwrap() -= 1;
            let groups: Vec<Group> = cap.keys().copied().collect();
            // b and c placement, then counts of derivative ports per group.
            for gb in &groups {
                for gc in &groups {
                    let mut left = cap.clone();
                    if left[gb] == 0 {
                        continue;
                    }
                    *left.get_mut(gb).unwrap() -= 1;
                    if left[gc] == 0 {
                        continue;
                    }
                    *left.get_mut(gc).unwrap() -= 1;
                    let total: usize = left.values().sum();
                    if total != ports - 2 {
                        continue;
                    }
                    // Derivative ports must fill the remaining capacity exactly;
                    // enumerate every distribution of the labelled ports.
                    let mut terms = Vec::new();
                    let slots: Vec<Group> = left.iter().flat_map(|(g, &k)| std::iter::repeat(*g).take(k)).collect();
                    let mut assignments = BTreeSet::new();
                    permute_assignments(&slots, &mut Vec::new(), &mut vec![false; slots.len()], &mut assignments);
                    for asg in assignments {
                        let mut placement = vec![*gb, *gc];
                        placement.extend(asg);
                        terms.push(build_candidate_term(nabla, white, nabla_parent, into, &placement));
                    }
                    out.push(Candidate { terms });
                }
            }
        }
    }
    out
}

/// All distinct sequences obtained by permuting `slots`.
fn permute_assignments(slots: &[Group], cur: &mut Vec<Group>, used: &mut Vec<bool>, out: &mut BTreeSet<Vec<Group>>) {
    if cur.len() == slots.len() {
        out.insert(cur.clone());
        return;
    }
    for i in 0..slots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        cur.push(slots[i]);
        permute_assignments(slots, cur, used, out);
        cur.pop();
        used[i] = false;
    }
}

fn build_candidate_term(
    nabla: VertexKind,
    white: VertexKind,
    nabla_parent: bool,
    into: Slot,
    placement: &[Group],
) -> LocalTerm {
    // Internal vertex 0 is the child, 1 the parent.
    let (nabla_idx, white_idx) = if nabla_parent { (1, 0) } else { (0, 1) };
    let ports = placement
        .iter()
        .map(|g| match g {
            Group::NablaBase(i) => (nabla_idx, Slot::Base(*i)),
            Group::NablaSym => (nabla_idx, Slot::Sym),
            Group::WhiteSym => (white_idx, Slot::Sym),
        })
        .collect();
    let vertices = if nabla_parent { vec![white, nabla] } else { vec![nabla, white] };
    LocalTerm { coeff: Q::one(), vertices, root: 1, inner: Some((0, 1, into)), ports, white_rank: vec![white_idx] }
}

/// Derives the connection rule of order `w` in probe dimension `n`.
///
/// Every candidate orbit of two-vertex trees (plus the single white of
/// arity `w + 2`) is realised as a tensor on random rational jet data; the
/// exact infinitesimal action of the same jet-group element on the order-`w`
/// connection jet is computed independently by linearising the Christoffel
/// transformation law.  The unique coefficient vector matching the two is
/// the rule.
pub fn derive_connection_rule(w: u32, n: usize) -> Result<RuleTemplate> {
    if n < 2 * w as usize + 4 {
        return Err(Error::Domain(format!("probe dimension {n} below the stable bound {}", 2 * w + 4)));
    }
    let candidates = connection_candidates(w);
    let k = candidates.len();
    let mut rref = Rref::new(k + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ ((w as u64) << 8) ^ n as u64);
    let mut samples = 0;
    let mut extra = 0;
    while extra < 3 {
        samples += 1;
        if samples > 400 {
            return Err(Error::Internal(format!(
                "connection rule of order {w}: matching system stays singular (rank {} of {k})",
                rref.rank()
            )));
        }
        let data = jets::JetData::random_sparse(n, w, &mut rng);
        let xi = jets::random_sparse_xi(n, 2, w as usize + 2, &mut rng);
        let action = jets::infinitesimal_connection(&data, &xi, w)?;
        // Orbit sums are symmetric in the derivative ports, so one ordering
        // (non-decreasing) per coordinate suffices.
        let mut realised: Vec<BTreeMap<Vec<usize>, Q>> = Vec::with_capacity(k);
        for c in &candidates {
            let mut acc: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
            for t in &c.terms {
                for (idx, v) in jets::realize_local(t, &data, &xi)? {
                    if idx[3..].windows(2).all(|p| p[0] <= p[1]) {
                        *acc.entry(idx).or_insert_with(Q::zero) += v;
                    }
                }
            }
            realised.push(acc);
        }
        let mut coords: BTreeSet<Vec<usize>> = action.keys().cloned().collect();
        for r in &realised {
            coords.extend(r.iter().filter(|(_, v)| !v.is_zero()).map(|(i, _)| i.clone()));
        }
        for c in coords {
            let mut row = BTreeMap::new();
            for (j, r) in realised.iter().enumerate() {
                if let Some(v) = r.get(&c) {
                    if !v.is_zero() {
                        row.insert(j, v.clone());
                    }
                }
            }
            if let Some(v) = action.get(&c) {
                if !v.is_zero() {
                    row.insert(k, v.clone());
                }
            }
            rref.insert(row);
        }
        if rref.pivot_rows().contains_key(&k) {
            return Err(Error::Internal(format!("connection rule of order {w}: action outside candidate span")));
        }
        if rref.rank() == k {
            extra += 1;
        }
    }
    let coeffs = rref
        .unique_solution()
        .ok_or_else(|| Error::Internal(format!("connection rule of order {w}: no unique solution")))?;
    let mut terms = Vec::new();
    for (c, coeff) in candidates.iter().zip(coeffs) {
        if coeff.is_zero() {
            continue;
        }
        if !coeff.is_integer() {
            return Err(Error::Internal(format!("connection rule of order {w}: non-integral coefficient {coeff}")));
        }
        for t in &c.terms {
            let mut t = t.clone();
            t.coeff = coeff.clone();
            terms.push(t);
        }
    }
    Ok(RuleTemplate { source: VertexKind::Connection { deriv: w }, terms })
}

/// `Σ_{s,t ≥ 2, s+t = u+1} C(u, t)`: the expected size of the white rule.
pub fn white_rule_size(u: u32) -> usize {
    (2..=u).filter(|t| u + 1 - t >= 2).map(|t| binomial(u as usize, t as usize)).sum()
}

/// `Σ_{s ≥ 2, s+u′ = v+1} C(v, u′) + [u′ ≥ 1] C(v, s)`.
pub fn vector_rule_size(v: u32) -> usize {
    (2..=v + 1)
        .map(|s| {
            let up = v + 1 - s;
            binomial(v as usize, up as usize) + if up >= 1 { binomial(v as usize, s as usize) } else { 0 }
        })
        .sum()
}

/// Binomial coefficient (zero outside the range).
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Integer coefficient helper for tests and callers.
pub fn coeff(n: i64) -> Q {
    q(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_rule_sizes() {
        assert!(replace_white(2).unwrap().terms.is_empty());
        assert_eq!(replace_white(3).unwrap().terms.len(), 3);
        assert_eq!(replace_white(4).unwrap().terms.len(), 10);
        for u in 2..=8 {
            assert_eq!(replace_white(u).unwrap().terms.len(), white_rule_size(u));
        }
        assert!(replace_white(1).is_err());
    }

    #[test]
    fn vector_rule_sizes() {
        assert_eq!(replace_vectorfield(0).terms.len(), 0);
        assert_eq!(replace_vectorfield(1).terms.len(), 1);
        assert_eq!(replace_vectorfield(2).terms.len(), 4);
        for v in 0..=6 {
            assert_eq!(replace_vectorfield(v).terms.len(), vector_rule_size(v));
        }
    }

    #[test]
    fn explicit_connection_rules() {
        let r0 = replace_connection(0).unwrap();
        assert_eq!(r0.terms.len(), 1);
        assert_eq!(r0.terms[0].coeff, q(-1));
        assert_eq!(r0.terms[0].vertices, vec![VertexKind::White { arity: 2 }]);
        let r1 = replace_connection(1).unwrap();
        assert_eq!(r1.terms.len(), 4);
        assert!(r1.terms.iter().any(|t| t.coeff == q(-1) && t.vertices == vec![VertexKind::White { arity: 3 }]));
    }

    #[test]
    fn all_templates_preserve_boundary() {
        for u in 2..=6 {
            assert!(replace_white(u).unwrap().check_boundary());
        }
        for v in 0..=5 {
            assert!(replace_vectorfield(v).check_boundary());
        }
        for w in 0..=1 {
            assert!(replace_connection(w).unwrap().check_boundary());
        }
    }

    #[test]
    fn all_coefficients_are_integers() {
        for u in 2..=6 {
            assert!(replace_white(u).unwrap().terms.iter().all(|t| t.coeff.is_integer()));
        }
        for v in 0..=5 {
            assert!(replace_vectorfield(v).terms.iter().all(|t| t.coeff.is_integer()));
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(2, 3), 0);
    }
}
