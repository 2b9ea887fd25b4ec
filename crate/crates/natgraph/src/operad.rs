//! The operad of degree-zero anchored graphs.
//!
//! Arity-`d` elements are formal sums of anchored white-free graphs whose
//! vector-field vertices carry the labels `1..=d` once each.  Partial
//! composition `G′ ∘ᵢ G″` replaces the vertex `X′ᵢ` by `G″`: the anchor of
//! `G″` is cut off and its root is grafted where `X′ᵢ`'s output went, every
//! input edge of `X′ᵢ` is regrafted on a black vertex of `G″` in all possible
//! ways, and the labels are renumbered as `X′₁…X′ᵢ₋₁, X″₁…X″ᵥ, X′ᵢ₊₁…`.
//! Symmetric groups act on the right by permuting labels.
//!
//! On top of this sit the pre-Lie generator `p`, the Lie bracket `b`, the
//! covariant-derivative cocycle `c`, the expansion of bracket words into
//! graphs, and the trace map from operators `X₀ ↦ …` linear of order zero
//! in an extra field `X₀` to wheeled graphs.

use std::fmt;

use num_traits::One;
use rayon::prelude::*;

use crate::graph::{Edge, FormalSum, Graph, Slot, VertexKind};
use crate::{q, Error, Result, Q};

/// A formal sum of degree-zero anchored graphs of a fixed arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperadElement {
    arity: usize,
    sum: FormalSum,
}

fn check_operad_graph(g: &Graph, arity: usize) -> Result<()> {
    g.check()?;
    if g.degree() != 0 {
        return Err(Error::Domain(format!("operad elements have no white vertices (found {})", g.degree())));
    }
    if g.anchor().is_none() {
        return Err(Error::Domain("operad elements are anchored graphs".into()));
    }
    let expected: Vec<u32> = (1..=arity as u32).collect();
    if g.labels() != expected {
        return Err(Error::Domain(format!(
            "labels {:?} do not match arity {arity} (expected 1..={arity}, each once)",
            g.labels()
        )));
    }
    Ok(())
}

impl OperadElement {
    /// Wraps a sum, checking that every term is an arity-`arity` graph.
    pub fn new(sum: FormalSum, arity: usize) -> Result<OperadElement> {
        if arity == 0 {
            return Err(Error::Domain("operad arity must be at least 1".into()));
        }
        for (k, _) in sum.iter() {
            check_operad_graph(k.graph(), arity)?;
        }
        Ok(OperadElement { arity, sum })
    }

    /// The single graph `g`, its arity read off from its labels.
    pub fn from_graph(g: &Graph) -> Result<OperadElement> {
        let arity = g.labels().len();
        check_operad_graph(g, arity.max(1))?;
        Ok(OperadElement { arity, sum: FormalSum::from_graph(g)? })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn sum(&self) -> &FormalSum {
        &self.sum
    }

    pub fn into_sum(self) -> FormalSum {
        self.sum
    }

    pub fn is_empty(&self) -> bool {
        self.sum.is_empty()
    }

    /// `α self + β other` (arities must agree).
    pub fn combine(&self, other: &OperadElement, alpha: &Q, beta: &Q) -> Result<OperadElement> {
        if self.arity != other.arity {
            return Err(Error::Domain(format!("arity mismatch: {} vs {}", self.arity, other.arity)));
        }
        Ok(OperadElement { arity: self.arity, sum: FormalSum::combine(&self.sum, &other.sum, alpha, beta) })
    }
}

/// The unit `X₁ → ■`.
pub fn unit() -> OperadElement {
    let mut g = Graph::empty();
    let x = g.add_vertex(VertexKind::Vector { label: 1, deriv: 0 });
    let a = g.add_vertex(VertexKind::Anchor);
    g.connect(x, a, Slot::Sym);
    OperadElement::from_graph(&g).expect("unit is valid")
}

/// The chain `X_first → X_second → ■`, i.e. the derivative of `X_second`
/// in the direction of `X_first`.
pub fn chain_graph(first: u32, second: u32) -> Graph {
    let mut g = Graph::empty();
    let x = g.add_vertex(VertexKind::Vector { label: first, deriv: 0 });
    let y = g.add_vertex(VertexKind::Vector { label: second, deriv: 1 });
    let a = g.add_vertex(VertexKind::Anchor);
    g.connect(x, y, Slot::Sym);
    g.connect(y, a, Slot::Sym);
    g
}

/// The graph `∇(X_first, X_second) → ■` with the fields in base slots 0, 1.
pub fn nabla_graph(first: u32, second: u32) -> Graph {
    let mut g = Graph::empty();
    let x = g.add_vertex(VertexKind::Vector { label: first, deriv: 0 });
    let y = g.add_vertex(VertexKind::Vector { label: second, deriv: 0 });
    let n = g.add_vertex(VertexKind::Connection { deriv: 0 });
    let a = g.add_vertex(VertexKind::Anchor);
    g.connect(x, n, Slot::Base(0));
    g.connect(y, n, Slot::Base(1));
    g.connect(n, a, Slot::Sym);
    g
}

/// The pre-Lie generator `p = X₂ → X₁ → ■`.
pub fn p() -> OperadElement {
    OperadElement::from_graph(&chain_graph(2, 1)).expect("p is valid")
}

/// The Lie bracket `b = p(τ − 1) = (X₁ → X₂ → ■) − (X₂ → X₁ → ■)`.
pub fn b() -> OperadElement {
    let p = p();
    let pt = sigma_action(&p, &[2, 1]).expect("transposition");
    pt.combine(&p, &q(1), &q(-1)).expect("same arity")
}

/// The covariant derivative `c = ∇(X₁, X₂) + (X₁ → X₂ → ■)`.
pub fn c() -> OperadElement {
    let mut s = FormalSum::from_graph(&nabla_graph(1, 2)).expect("valid");
    s.add_graph(&chain_graph(1, 2), &Q::one()).expect("valid");
    OperadElement::new(s, 2).expect("c is valid")
}

/// All monomials `G′ ∘ᵢᶠ G″`, one per map `f` from the inputs of `X′ᵢ` to
/// the black vertices of `G″`, before canonicalisation.
pub fn compose_monomials(outer: &Graph, i: usize, inner: &Graph) -> Result<Vec<Graph>> {
    let u = outer.labels().len();
    let v = inner.labels().len();
    if i == 0 || i > u {
        return Err(Error::Domain(format!("slot {i} out of range 1..={u}")));
    }
    check_operad_graph(outer, u)?;
    check_operad_graph(inner, v)?;
    let xi = outer.find_label(i as u32).expect("labels checked");
    let inner_anchor = inner.anchor().expect("anchored");
    let inner_root = inner.edges.iter().find(|e| e.to == inner_anchor).expect("anchor is fed").from;
    let blacks: Vec<usize> = (0..inner.vertices.len()).filter(|&w| inner.vertices[w].is_black()).collect();

    // Vertex layout: outer vertices except X′ᵢ, then inner vertices except the anchor.
    let mut outer_map = vec![usize::MAX; outer.vertices.len()];
    let mut vertices = Vec::new();
    for (w, k) in outer.vertices.iter().enumerate() {
        if w == xi {
            continue;
        }
        outer_map[w] = vertices.len();
        vertices.push(match *k {
            VertexKind::Vector { label, deriv } => {
                let label = if label < i as u32 { label } else { label + v as u32 - 1 };
                VertexKind::Vector { label, deriv }
            }
            other => other,
        });
    }
    let mut inner_map = vec![usize::MAX; inner.vertices.len()];
    for (w, k) in inner.vertices.iter().enumerate() {
        if w == inner_anchor {
            continue;
        }
        inner_map[w] = vertices.len();
        vertices.push(match *k {
            VertexKind::Vector { label, deriv } => VertexKind::Vector { label: label + i as u32 - 1, deriv },
            other => other,
        });
    }
    let root = inner_map[inner_root];

    let mut fixed = Vec::new();
    let mut inputs = Vec::new();
    for e in &outer.edges {
        let from = if e.from == xi { root } else { outer_map[e.from] };
        if e.to == xi {
            inputs.push(from);
        } else {
            fixed.push(Edge { from, to: outer_map[e.to], slot: e.slot });
        }
    }
    for e in &inner.edges {
        if e.to != inner_anchor {
            fixed.push(Edge { from: inner_map[e.from], to: inner_map[e.to], slot: e.slot });
        }
    }

    let targets: Vec<usize> = blacks.iter().map(|&w| inner_map[w]).collect();
    let total = targets.len().pow(inputs.len() as u32);
    let mut out = Vec::with_capacity(total);
    let mut f = vec![0usize; inputs.len()];
    for _ in 0..total {
        let mut g = Graph { vertices: vertices.clone(), edges: fixed.clone(), white_order: Vec::new() };
        for (k, &src) in inputs.iter().enumerate() {
            let t = targets[f[k]];
            g.vertices[t] = g.vertices[t].with_extra_inputs(1);
            g.edges.push(Edge { from: src, to: t, slot: Slot::Sym });
        }
        out.push(g);
        for digit in f.iter_mut() {
            *digit += 1;
            if *digit < targets.len() {
                break;
            }
            *digit = 0;
        }
    }
    Ok(out)
}

/// The partial composition `G′ ∘ᵢ G″`, extended bilinearly.
pub fn compose(outer: &OperadElement, i: usize, inner: &OperadElement) -> Result<OperadElement> {
    if i == 0 || i > outer.arity {
        return Err(Error::Domain(format!("slot {i} out of range 1..={}", outer.arity)));
    }
    let pairs: Vec<(&Graph, &Q, &Graph, &Q)> = outer
        .sum
        .iter()
        .flat_map(|(a, ca)| inner.sum.iter().map(move |(b, cb)| (a.graph(), ca, b.graph(), cb)))
        .collect();
    let parts: Vec<Result<FormalSum>> = pairs
        .par_iter()
        .map(|(a, ca, b, cb)| {
            let coeff = *ca * *cb;
            let mut s = FormalSum::new();
            for g in compose_monomials(a, i, b)? {
                s.add_graph(&g, &coeff)?;
            }
            Ok(s)
        })
        .collect();
    let mut sum = FormalSum::new();
    for part in parts {
        sum.add_scaled(&part?, &Q::one());
    }
    Ok(OperadElement { arity: outer.arity + inner.arity - 1, sum })
}

/// Checks that `sigma` lists a permutation of `1..=d`.
fn check_permutation(sigma: &[usize], d: usize) -> Result<()> {
    if sigma.len() != d {
        return Err(Error::Domain(format!("permutation of size {} applied to arity {d}", sigma.len())));
    }
    let mut seen = vec![false; d];
    for &s in sigma {
        if s == 0 || s > d || seen[s - 1] {
            return Err(Error::Domain(format!("{sigma:?} is not a permutation of 1..={d}")));
        }
        seen[s - 1] = true;
    }
    Ok(())
}

/// Renames every label `l` of every term to `rename(l)` and canonicalises.
pub fn relabel(x: &FormalSum, rename: impl Fn(u32) -> u32) -> FormalSum {
    let mut out = FormalSum::new();
    for (k, c) in x.iter() {
        out.add_graph_unchecked(&k.graph().map_labels(&rename), c);
    }
    out
}

/// The right action `G·σ`: the vertex labelled `σ(k)` is relabelled `k`.
/// `sigma` lists `σ(1), …, σ(d)`; the action satisfies `(G·σ)·τ = G·(στ)`.
pub fn sigma_action(x: &OperadElement, sigma: &[usize]) -> Result<OperadElement> {
    check_permutation(sigma, x.arity)?;
    let mut inverse = vec![0u32; x.arity + 1];
    for (k, &s) in sigma.iter().enumerate() {
        inverse[s] = k as u32 + 1;
    }
    Ok(OperadElement { arity: x.arity, sum: relabel(&x.sum, |l| inverse[l as usize]) })
}

/// The two binary operations of bracket words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordOp {
    /// The Lie bracket, mapped to `b`.
    Bracket,
    /// The covariant derivative `⋆`, mapped to `c`.
    Star,
}

/// A binary bracket word on the variables `X₁…X_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Word {
    Var(u32),
    Node(WordOp, Box<Word>, Box<Word>),
}

impl Word {
    /// Variables in left-to-right order.
    pub fn leaves(&self) -> Vec<u32> {
        match self {
            Word::Var(l) => vec![*l],
            Word::Node(_, a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }

    pub fn bracket(a: Word, b: Word) -> Word {
        Word::Node(WordOp::Bracket, Box::new(a), Box::new(b))
    }

    pub fn star(a: Word, b: Word) -> Word {
        Word::Node(WordOp::Star, Box::new(a), Box::new(b))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Word::Var(l) => write!(f, "X{l}"),
            Word::Node(op, a, b) => {
                let tag = match op {
                    WordOp::Bracket => "b",
                    WordOp::Star => "c",
                };
                write!(f, "({tag} {a} {b})")
            }
        }
    }
}

/// Parses `X3`, `(b W W)` and `(c W W)`; every variable `X1…X_d` must occur
/// exactly once.
pub fn parse_word(text: &str) -> Result<Word> {
    let tokens: Vec<String> =
        text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect();
    let mut pos = 0;
    let word = parse_tokens(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::Schema(format!("trailing input after word: {:?}", &tokens[pos..])));
    }
    let mut leaves = word.leaves();
    leaves.sort_unstable();
    let expected: Vec<u32> = (1..=leaves.len() as u32).collect();
    if leaves != expected {
        return Err(Error::Schema(format!("word must use X1..X{} exactly once each", expected.len())));
    }
    Ok(word)
}

fn parse_tokens(tokens: &[String], pos: &mut usize) -> Result<Word> {
    let tok = tokens.get(*pos).ok_or_else(|| Error::Schema("unexpected end of word".into()))?;
    *pos += 1;
    if tok == "(" {
        let op = match tokens.get(*pos).map(String::as_str) {
            Some("b") => WordOp::Bracket,
            Some("c") => WordOp::Star,
            other => return Err(Error::Schema(format!("expected operator b or c, found {other:?}"))),
        };
        *pos += 1;
        let a = parse_tokens(tokens, pos)?;
        let b = parse_tokens(tokens, pos)?;
        if tokens.get(*pos).map(String::as_str) != Some(")") {
            return Err(Error::Schema("expected ')' after two operands".into()));
        }
        *pos += 1;
        Ok(Word::Node(op, Box::new(a), Box::new(b)))
    } else if let Some(num) = tok.strip_prefix('X') {
        let l: u32 = num.parse().map_err(|_| Error::Schema(format!("bad variable {tok:?}")))?;
        if l == 0 {
            return Err(Error::Schema("variables are numbered from X1".into()));
        }
        Ok(Word::Var(l))
    } else {
        Err(Error::Schema(format!("unexpected token {tok:?}")))
    }
}

/// The image of a word under the morphism sending the bracket to `b` and
/// `⋆` to `c`, computed by iterated composition.
pub fn expand_word(word: &Word) -> Result<OperadElement> {
    let positional = expand_positional(word)?;
    let leaves = word.leaves();
    let sum = relabel(positional.sum(), |k| leaves[k as usize - 1]);
    OperadElement::new(sum, leaves.len())
}

/// Expansion with the leaves numbered `1…d` from left to right.
fn expand_positional(word: &Word) -> Result<OperadElement> {
    match word {
        Word::Var(_) => Ok(unit()),
        Word::Node(op, a, b) => {
            let gen = match op {
                WordOp::Bracket => self::b(),
                WordOp::Star => c(),
            };
            let right = compose(&gen, 2, &expand_positional(b)?)?;
            compose(&right, 1, &expand_positional(a)?)
        }
    }
}

/// Parses and expands a bracket word such as `(b (b X1 X2) X3)`.
pub fn lie_expand(text: &str) -> Result<OperadElement> {
    expand_word(&parse_word(text)?)
}

/// The trace of a graph that is linear of order zero in `X₀`: the anchor
/// and `X₀` are removed and the edge into the anchor is spliced into the
/// slot `X₀` used to occupy, closing a wheel.  The coefficient is `+1`.
pub fn trace_map(g: &Graph) -> Result<Graph> {
    g.check()?;
    let x0 = g.find_label(0).ok_or_else(|| Error::Domain("trace needs the field X0".into()))?;
    if g.vertices[x0] != (VertexKind::Vector { label: 0, deriv: 0 }) {
        return Err(Error::Domain("X0 must carry no derivatives".into()));
    }
    let anchor = g.anchor().ok_or_else(|| Error::Domain("trace needs an anchored graph".into()))?;
    let into_anchor = g.edges.iter().find(|e| e.to == anchor).expect("valid graph");
    let out_x0 = g.edges.iter().find(|e| e.from == x0).expect("valid graph");
    if into_anchor.from == x0 {
        return Err(Error::Domain("X0 feeds the anchor directly; its trace is not a graph".into()));
    }
    let keep: Vec<usize> = (0..g.vertices.len()).filter(|&w| w != x0 && w != anchor).collect();
    let mut index = vec![usize::MAX; g.vertices.len()];
    for (n, &w) in keep.iter().enumerate() {
        index[w] = n;
    }
    let mut out = Graph {
        vertices: keep.iter().map(|&w| g.vertices[w]).collect(),
        edges: Vec::new(),
        white_order: g.white_order.iter().map(|&w| index[w]).collect(),
    };
    for e in &g.edges {
        if e.from == x0 || e.to == anchor {
            continue;
        }
        out.edges.push(Edge { from: index[e.from], to: index[e.to], slot: e.slot });
    }
    out.edges.push(Edge { from: index[into_anchor.from], to: index[out_x0.to], slot: out_x0.slot });
    out.check()?;
    Ok(out)
}

/// The trace extended linearly.
pub fn trace_sum(x: &FormalSum) -> Result<FormalSum> {
    let mut out = FormalSum::new();
    for (k, c) in x.iter() {
        out.add_graph(&trace_map(k.graph())?, c)?;
    }
    Ok(out)
}

/// A preimage of a wheel graph under the trace: the wheel edge `edge` is
/// cut, its source feeds a new anchor and a new `X₀` fills the freed slot.
pub fn cut_wheel(g: &Graph, edge: usize) -> Result<Graph> {
    g.check()?;
    if g.anchor().is_some() || g.find_label(0).is_some() {
        return Err(Error::Domain("cutting needs an anchor-free graph without X0".into()));
    }
    let e = *g.edges.get(edge).ok_or_else(|| Error::Domain(format!("edge {edge} out of range")))?;
    let on_cycle = {
        let mut x = e.to;
        let mut steps = 0;
        while x != e.from && steps <= g.vertices.len() {
            x = g.edges.iter().find(|f| f.from == x).map(|f| f.to).unwrap_or(usize::MAX);
            if x == usize::MAX {
                break;
            }
            steps += 1;
        }
        x == e.from
    };
    if !on_cycle {
        return Err(Error::Domain(format!("edge {edge} does not lie on a wheel")));
    }
    let mut out = g.clone();
    out.edges.remove(edge);
    let x0 = out.add_vertex(VertexKind::Vector { label: 0, deriv: 0 });
    let a = out.add_vertex(VertexKind::Anchor);
    out.connect(e.from, a, Slot::Sym);
    out.connect(x0, e.to, e.slot);
    out.check()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::canon::same_class;

    fn chain3(bottom: u32, middle: u32, top: u32) -> Graph {
        let mut g = Graph::empty();
        let x = g.add_vertex(VertexKind::Vector { label: bottom, deriv: 0 });
        let y = g.add_vertex(VertexKind::Vector { label: middle, deriv: 1 });
        let z = g.add_vertex(VertexKind::Vector { label: top, deriv: 1 });
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(x, y, Slot::Sym);
        g.connect(y, z, Slot::Sym);
        g.connect(z, a, Slot::Sym);
        g
    }

    fn cherry(left: u32, right: u32, top: u32) -> Graph {
        let mut g = Graph::empty();
        let x = g.add_vertex(VertexKind::Vector { label: left, deriv: 0 });
        let y = g.add_vertex(VertexKind::Vector { label: right, deriv: 0 });
        let z = g.add_vertex(VertexKind::Vector { label: top, deriv: 2 });
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(x, z, Slot::Sym);
        g.connect(y, z, Slot::Sym);
        g.connect(z, a, Slot::Sym);
        g
    }

    fn sum_of(graphs: &[(Graph, i64)]) -> FormalSum {
        let mut s = FormalSum::new();
        for (g, c) in graphs {
            s.add_graph(g, &q(*c)).unwrap();
        }
        s
    }

    #[test]
    fn p_composed_in_first_slot_gives_chain_and_cherry() {
        let p = p();
        let m = compose_monomials(&chain_graph(2, 1), 1, &chain_graph(2, 1)).unwrap();
        assert_eq!(m.len(), 2);
        let r = compose(&p, 1, &p).unwrap();
        assert_eq!(r.arity(), 3);
        assert_eq!(*r.sum(), sum_of(&[(chain3(3, 2, 1), 1), (cherry(2, 3, 1), 1)]));
    }

    #[test]
    fn p_composed_in_second_slot_gives_chain() {
        let m = compose_monomials(&chain_graph(2, 1), 2, &chain_graph(2, 1)).unwrap();
        assert_eq!(m.len(), 1);
        assert!(same_class(&m[0], &chain3(3, 2, 1)));
    }

    #[test]
    fn slot_out_of_range_is_rejected() {
        assert!(compose(&p(), 0, &p()).is_err());
        assert!(compose(&p(), 3, &p()).is_err());
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let b = b();
        assert_eq!(b.sum().len(), 2);
        let bt = sigma_action(&b, &[2, 1]).unwrap();
        assert_eq!(*bt.sum(), -b.sum());
        assert_ne!(sigma_action(&p(), &[2, 1]).unwrap(), p());
        assert_eq!(sigma_action(&p(), &[1, 2]).unwrap(), p());
        assert!(sigma_action(&p(), &[1]).is_err());
        assert!(sigma_action(&p(), &[1, 1]).is_err());
    }

    #[test]
    fn word_parsing() {
        let w = parse_word("(b (b X1 X2) X3)").unwrap();
        assert_eq!(w.to_string(), "(b (b X1 X2) X3)");
        assert_eq!(w.leaves(), vec![1, 2, 3]);
        assert_eq!(parse_word("X1").unwrap(), Word::Var(1));
        for bad in ["", "(b X1)", "(b X1 X2", "(b X1 X1)", "(b X1 X3)", "(x X1 X2)", "(b X1 X2) X3", "Y1"] {
            assert!(matches!(parse_word(bad), Err(Error::Schema(_))), "{bad}");
        }
    }

    #[test]
    fn bracket_word_expands_to_b() {
        assert_eq!(lie_expand("(b X1 X2)").unwrap(), b());
        assert_eq!(*lie_expand("(b X2 X1)").unwrap().sum(), -b().sum());
        assert_eq!(lie_expand("(c X1 X2)").unwrap(), c());
    }

    #[test]
    fn trace_of_derivative_is_divergence() {
        let g = chain_graph(0, 1);
        let t = trace_map(&g).unwrap();
        let mut want = Graph::empty();
        let y = want.add_vertex(VertexKind::Vector { label: 1, deriv: 1 });
        want.connect(y, y, Slot::Sym);
        assert!(same_class(&t, &want));
        assert!(same_class(&trace_map(&cut_wheel(&want, 0).unwrap()).unwrap(), &want));
    }

    #[test]
    fn trace_of_bare_x0_is_an_error() {
        let mut g = Graph::empty();
        let x = g.add_vertex(VertexKind::Vector { label: 0, deriv: 0 });
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(x, a, Slot::Sym);
        assert!(trace_map(&g).is_err());
    }
}
