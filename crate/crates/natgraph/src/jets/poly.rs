//! Sparse truncated multivariate polynomials over exact rings.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::Q;

/// The exact coefficient rings used by the jet oracle: ℚ, and dual numbers
/// `ℚ[ε]/ε²` for first-order (infinitesimal) expansions.
pub trait Ring: Clone + Debug + PartialEq + Send + Sync {
    fn r_zero() -> Self;
    fn r_one() -> Self;
    fn r_is_zero(&self) -> bool;
    fn from_q(q: Q) -> Self;
    fn r_add(&self, o: &Self) -> Self;
    fn r_mul(&self, o: &Self) -> Self;
    fn r_neg(&self) -> Self;
    /// Multiplicative inverse when it exists.
    fn r_inv(&self) -> Option<Self>;
    fn r_sub(&self, o: &Self) -> Self {
        self.r_add(&o.r_neg())
    }
}

impl Ring for Q {
    fn r_zero() -> Self {
        <Q as Zero>::zero()
    }
    fn r_one() -> Self {
        <Q as One>::one()
    }
    fn r_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_q(q: Q) -> Self {
        q
    }
    fn r_add(&self, o: &Self) -> Self {
        self + o
    }
    fn r_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn r_neg(&self) -> Self {
        -self.clone()
    }
    fn r_inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| <Q as One>::one() / self.clone())
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dual {
    pub re: Q,
    pub eps: Q,
}

impl Dual {
    pub fn new(re: Q, eps: Q) -> Dual {
        Dual { re, eps }
    }
}

impl Ring for Dual {
    fn r_zero() -> Self {
        Dual::new(<Q as Zero>::zero(), <Q as Zero>::zero())
    }
    fn r_one() -> Self {
        Dual::new(<Q as One>::one(), <Q as Zero>::zero())
    }
    fn r_is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.eps)
    }
    fn from_q(q: Q) -> Self {
        Dual::new(q, <Q as Zero>::zero())
    }
    fn r_add(&self, o: &Self) -> Self {
        Dual::new(&self.re + &o.re, &self.eps + &o.eps)
    }
    fn r_mul(&self, o: &Self) -> Self {
        Dual::new(&self.re * &o.re, &self.re * &o.eps + &self.eps * &o.re)
    }
    fn r_neg(&self) -> Self {
        Dual::new(-self.re.clone(), -self.eps.clone())
    }
    fn r_inv(&self) -> Option<Self> {
        if Zero::is_zero(&self.re) {
            return None;
        }
        let inv = <Q as One>::one() / self.re.clone();
        let eps = -(&self.eps * &inv * &inv);
        Some(Dual::new(inv, eps))
    }
}

/// Exponent vector of a monomial.
pub type Monomial = Vec<u16>;

/// A polynomial in `n` variables, truncated at total degree `max_deg`
/// (monomials of higher degree are discarded by every operation).
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C: Ring> {
    pub n: usize,
    pub max_deg: usize,
    pub terms: BTreeMap<Monomial, C>,
}

/// Total degree of a monomial.
pub fn mono_degree(m: &[u16]) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

/// `α! = Π αᵢ!`.
pub fn mono_factorial(m: &[u16]) -> Q {
    let mut f = num_bigint::BigInt::one();
    for &e in m {
        for k in 2..=e as u64 {
            f *= k;
        }
    }
    Q::from_integer(f)
}

/// The sorted index multiset of a monomial (`x₀²x₂ ↦ [0,0,2]`).
pub fn mono_indices(m: &[u16]) -> Vec<usize> {
    let mut out = Vec::with_capacity(mono_degree(m));
    for (i, &e) in m.iter().enumerate() {
        out.extend(std::iter::repeat(i).take(e as usize));
    }
    out
}

/// The monomial with the given index multiset.
pub fn mono_from_indices(n: usize, idx: &[usize]) -> Monomial {
    let mut m = vec![0u16; n];
    for &i in idx {
        m[i] += 1;
    }
    m
}

impl<C: Ring> Poly<C> {
    pub fn zero(n: usize, max_deg: usize) -> Poly<C> {
        Poly { n, max_deg, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, max_deg: usize, c: C) -> Poly<C> {
        let mut p = Poly::zero(n, max_deg);
        p.add_term(vec![0; n], c);
        p
    }

    /// The coordinate function `xᵢ`.
    pub fn var(n: usize, max_deg: usize, i: usize) -> Poly<C> {
        let mut p = Poly::zero(n, max_deg);
        let mut m = vec![0; n];
        m[i] = 1;
        p.add_term(m, C::r_one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c·x^m` (ignored above the truncation degree).
    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.r_is_zero() || mono_degree(&m) > self.max_deg {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let v = e.get().r_add(&c);
                if v.r_is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn coeff(&self, m: &[u16]) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::r_zero)
    }

    pub fn add(&self, o: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        out.max_deg = self.max_deg.min(o.max_deg);
        out.terms.retain(|m, _| mono_degree(m) <= out.max_deg);
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly<C>) -> Poly<C> {
        self.add(&o.scale(&C::r_one().r_neg()))
    }

    pub fn scale(&self, c: &C) -> Poly<C> {
        let mut out = Poly::zero(self.n, self.max_deg);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.r_mul(c));
        }
        out
    }

    /// Truncated product.
    pub fn mul(&self, o: &Poly<C>) -> Poly<C> {
        let max_deg = self.max_deg.min(o.max_deg);
        let mut out = Poly::zero(self.n, max_deg);
        for (m1, c1) in &self.terms {
            let d1 = mono_degree(m1);
            for (m2, c2) in &o.terms {
                if d1 + mono_degree(m2) > max_deg {
                    continue;
                }
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, c1.r_mul(c2));
            }
        }
        out
    }

    /// Partial derivative `∂/∂xᵢ` (the truncation degree drops by one).
    pub fn deriv(&self, i: usize) -> Poly<C> {
        let mut out = Poly::zero(self.n, self.max_deg.saturating_sub(1));
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[i] -= 1;
            out.add_term(m2, c.r_mul(&C::from_q(Q::from_integer(m[i].into()))));
        }
        out
    }

    /// Re-truncates at a lower degree.
    pub fn truncate(&self, max_deg: usize) -> Poly<C> {
        let mut out = Poly::zero(self.n, max_deg.min(self.max_deg));
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// The constant term.
    pub fn at_origin(&self) -> C {
        self.coeff(&vec![0; self.n])
    }

    /// `self ∘ map`, where `map` has no constant term, truncated at
    /// `max_deg`.  `cache` memoises powers of the components of `map`.
    pub fn compose_cached(
        &self,
        map: &[Poly<C>],
        max_deg: usize,
        cache: &mut HashMap<(usize, u16), Poly<C>>,
    ) -> Poly<C> {
        let n_out = map.first().map(|p| p.n).unwrap_or(self.n);
        let mut out = Poly::zero(n_out, max_deg);
        for (m, c) in &self.terms {
            if mono_degree(m) > max_deg {
                continue;
            }
            let mut acc = Poly::constant(n_out, max_deg, c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = power(map, i, e, max_deg, cache);
                acc = acc.mul(&pw);
                if acc.is_zero() {
                    break;
                }
            }
            for (m2, c2) in acc.terms {
                out.add_term(m2, c2);
            }
        }
        out
    }

    pub fn compose(&self, map: &[Poly<C>], max_deg: usize) -> Poly<C> {
        self.compose_cached(map, max_deg, &mut HashMap::new())
    }

    /// Applies a coefficient map.
    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero(self.n, self.max_deg);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// The homogeneous part of degree `d`.
    pub fn homogeneous(&self, d: usize) -> Poly<C> {
        let mut out = Poly::zero(self.n, self.max_deg);
        for (m, c) in &self.terms {
            if mono_degree(m) == d {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }
}

fn power<C: Ring>(
    map: &[Poly<C>],
    i: usize,
    e: u16,
    max_deg: usize,
    cache: &mut HashMap<(usize, u16), Poly<C>>,
) -> Poly<C> {
    if let Some(p) = cache.get(&(i, e)) {
        if p.max_deg >= max_deg {
            return p.truncate(max_deg);
        }
    }
    let p = if e == 1 {
        map[i].truncate(max_deg)
    } else {
        power(map, i, e - 1, max_deg, cache).mul(&map[i].truncate(max_deg))
    };
    cache.insert((i, e), p.clone());
    p
}

/// Composition of polynomial maps `f ∘ g` (both fixing the origin).
pub fn compose_maps<C: Ring>(f: &[Poly<C>], g: &[Poly<C>], max_deg: usize) -> Vec<Poly<C>> {
    let mut cache = HashMap::new();
    f.iter().map(|p| p.compose_cached(g, max_deg, &mut cache)).collect()
}

/// Inverse of a square matrix over a ring, by Gauss–Jordan elimination.
pub fn invert_matrix<C: Ring>(a: &[Vec<C>]) -> Option<Vec<Vec<C>>> {
    let n = a.len();
    let mut m: Vec<Vec<C>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { C::r_one() } else { C::r_zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| m[r][col].r_inv().is_some())?;
        m.swap(col, piv);
        let inv = m[col][col].r_inv()?;
        for v in m[col].iter_mut() {
            *v = v.r_mul(&inv);
        }
        for r in 0..n {
            if r == col || m[r][col].r_is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            let pivot_row = m[col].clone();
            for (v, p) in m[r].iter_mut().zip(&pivot_row) {
                *v = v.r_sub(&f.r_mul(p));
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Linear part `A₁` of a map fixing the origin: `A₁[a][i] = ∂ᵢφᵃ(0)`.
pub fn linear_part<C: Ring>(phi: &[Poly<C>]) -> Vec<Vec<C>> {
    let n = phi.len();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|i| {
                    let mut m = vec![0u16; n];
                    m[i] = 1;
                    phi[a].coeff(&m)
                })
                .collect()
        })
        .collect()
}

/// Compositional inverse of a map fixing the origin with invertible
/// linear part, truncated at `max_deg`.
///
/// Writing `φ = A₁ + N`, the inverse solves `ψ = A₁⁻¹(y − N(ψ))`; each
/// fixed-point step fixes one more degree.
pub fn inverse_map<C: Ring>(phi: &[Poly<C>], max_deg: usize) -> Option<Vec<Poly<C>>> {
    let n = phi.len();
    let a1 = linear_part(phi);
    let a1inv = invert_matrix(&a1)?;
    let nonlinear: Vec<Poly<C>> = phi
        .iter()
        .map(|p| {
            let mut q = Poly::zero(n, max_deg);
            for (m, c) in &p.terms {
                if mono_degree(m) >= 2 {
                    q.add_term(m.clone(), c.clone());
                }
            }
            q
        })
        .collect();
    let ys: Vec<Poly<C>> = (0..n).map(|i| Poly::var(n, max_deg, i)).collect();
    let apply_inv = |v: &[Poly<C>]| -> Vec<Poly<C>> {
        (0..n)
            .map(|a| {
                let mut acc = Poly::zero(n, max_deg);
                for (i, vi) in v.iter().enumerate() {
                    if !a1inv[a][i].r_is_zero() {
                        acc = acc.add(&vi.scale(&a1inv[a][i]));
                    }
                }
                acc
            })
            .collect()
    };
    let mut psi = apply_inv(&ys);
    for _ in 1..max_deg {
        let npsi = compose_maps(&nonlinear, &psi, max_deg);
        let rhs: Vec<Poly<C>> = ys.iter().zip(&npsi).map(|(y, m)| y.sub(m)).collect();
        psi = apply_inv(&rhs);
    }
    Some(psi)
}
