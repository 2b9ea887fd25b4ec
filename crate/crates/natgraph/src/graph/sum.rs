//! Finite rational linear combinations of canonical graph classes.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::canon::{canonicalize_unchecked, CanonicalGraph, GraphClass};
use super::Graph;
use crate::Q;

/// A finite map from graph classes to non-zero rational coefficients.
///
/// The coefficient of a class refers to its canonical presentation, so a
/// presentation whose white order differs from the canonical one by an odd
/// permutation contributes with the opposite sign.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FormalSum {
    terms: BTreeMap<GraphClass, Q>,
}

impl FormalSum {
    /// The zero element.
    pub fn new() -> FormalSum {
        FormalSum::default()
    }

    /// The single graph `g` with coefficient one (zero if `g` is zero).
    pub fn from_graph(g: &Graph) -> crate::Result<FormalSum> {
        let mut s = FormalSum::new();
        s.add_graph(g, &Q::one())?;
        Ok(s)
    }

    /// Adds `coeff · g`, canonicalising `g`.
    pub fn add_graph(&mut self, g: &Graph, coeff: &Q) -> crate::Result<()> {
        g.check()?;
        self.add_graph_unchecked(g, coeff);
        Ok(())
    }

    pub(crate) fn add_graph_unchecked(&mut self, g: &Graph, coeff: &Q) {
        let (c, sign) = canonicalize_unchecked(g);
        if let CanonicalGraph::Class(class) = c {
            if sign > 0 {
                self.add_class(class, coeff.clone());
            } else {
                self.add_class(class, -coeff.clone());
            }
        }
    }

    /// Adds `coeff · class` (with respect to the canonical orientation).
    pub fn add_class(&mut self, class: GraphClass, coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(class) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Adds `coeff · other` in place.
    pub fn add_scaled(&mut self, other: &FormalSum, coeff: &Q) {
        if coeff.is_zero() {
            return;
        }
        for (k, c) in &other.terms {
            self.add_class(k.clone(), c * coeff);
        }
    }

    /// `α a + β b`.
    pub fn combine(a: &FormalSum, b: &FormalSum, alpha: &Q, beta: &Q) -> FormalSum {
        let mut out = FormalSum::new();
        out.add_scaled(a, alpha);
        out.add_scaled(b, beta);
        out
    }

    pub fn scaled(&self, coeff: &Q) -> FormalSum {
        let mut out = FormalSum::new();
        out.add_scaled(self, coeff);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GraphClass, &Q)> {
        self.terms.iter()
    }

    /// Coefficient of the class with the given key (zero if absent).
    pub fn coeff_of_key(&self, key: &str) -> Q {
        self.terms.iter().find(|(k, _)| k.key() == key).map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
    }

    /// Coefficient of the class of `g`, measured in `g`'s own orientation.
    pub fn coeff_of(&self, g: &Graph) -> Q {
        let (c, sign) = canonicalize_unchecked(g);
        match c {
            CanonicalGraph::Zero => Q::zero(),
            CanonicalGraph::Class(k) => {
                let v = self.terms.get(&k).cloned().unwrap_or_else(Q::zero);
                if sign > 0 {
                    v
                } else {
                    -v
                }
            }
        }
    }

    /// The common white count of all terms, or `None` for mixed or empty sums.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|k| k.graph().degree());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }
}

impl std::ops::Add for &FormalSum {
    type Output = FormalSum;
    fn add(self, rhs: &FormalSum) -> FormalSum {
        FormalSum::combine(self, rhs, &Q::one(), &Q::one())
    }
}

impl std::ops::Sub for &FormalSum {
    type Output = FormalSum;
    fn sub(self, rhs: &FormalSum) -> FormalSum {
        FormalSum::combine(self, rhs, &Q::one(), &-Q::one())
    }
}

impl std::ops::Neg for &FormalSum {
    type Output = FormalSum;
    fn neg(self) -> FormalSum {
        self.scaled(&-Q::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Slot, VertexKind};
    use crate::{q, qf};

    fn chain(first: u32, second: u32) -> Graph {
        let mut g = Graph::empty();
        let x = g.add_vertex(VertexKind::Vector { label: first, deriv: 0 });
        let y = g.add_vertex(VertexKind::Vector { label: second, deriv: 1 });
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(x, y, Slot::Sym);
        g.connect(y, a, Slot::Sym);
        g
    }

    #[test]
    fn combine_cancels_and_averages() {
        let p = FormalSum::from_graph(&chain(2, 1)).unwrap();
        let pt = FormalSum::from_graph(&chain(1, 2)).unwrap();
        let b = FormalSum::combine(&pt, &p, &q(1), &q(-1));
        assert_eq!(b.len(), 2);
        assert!(FormalSum::combine(&b, &b, &q(1), &q(-1)).is_empty());
        let half = FormalSum::combine(&p, &p, &qf(1, 2), &qf(1, 2));
        assert_eq!(half, p);
    }

    #[test]
    fn zero_graphs_are_never_stored() {
        let mut g = Graph::empty();
        let x = g.add_vertex(VertexKind::Vector { label: 1, deriv: 2 });
        let a = g.add_vertex(VertexKind::Anchor);
        g.connect(x, a, Slot::Sym);
        for _ in 0..2 {
            let w = g.add_vertex(VertexKind::White { arity: 2 });
            g.connect(w, x, Slot::Sym);
            for _ in 0..2 {
                let y = g.add_vertex(VertexKind::Vector { label: 2, deriv: 0 });
                g.connect(y, w, Slot::Sym);
            }
        }
        assert!(FormalSum::from_graph(&g).unwrap().is_empty());
    }
}
