//! Jets of vector fields and connections at the origin of ℝⁿ, their
//! transformation under polynomial coordinate changes, and the tensor
//! realisation of graphs.
//!
//! A jet is stored as a truncated Taylor polynomial per component; the
//! symmetric derivative array entry `X^a_{(s₁…s_v)}` equals the coefficient
//! of the monomial `x^α` (with `α` the multiset `{s₁…s_v}`) times `α!`.
//!
//! Coordinate changes act actively: for `φ` fixing the origin with inverse
//! `ψ`,
//!
//! * `(φ_*X)^a(y) = ∂ᵢφ^a(ψ(y)) Xⁱ(ψ(y))`,
//! * `(φ_*Γ)^a_{bc}(y) = ∂ᵢφ^a(ψ(y)) [Γⁱ_{jk}(ψ(y)) ∂_bψʲ(y) ∂_cψᵏ(y) + ∂_b∂_cψⁱ(y)]`,
//!
//! so that `∇_{∂_b}∂_c = Γ^a_{bc} ∂_a` is preserved.  The infinitesimal
//! action of a generator `ξ` is the `ε`-coefficient of the transformation by
//! `φ = id + εξ`, computed exactly over dual numbers.
//!
//! JSON layout of jet data (`eval` input):
//!
//! ```json
//! {"schemaVersion":1,"n":2,"order":2,
//!  "entries":[{"field":"X1","index":[0],"value":"1"},
//!             {"field":"X1","index":[1,0,1],"value":"-2/3"},
//!             {"field":"Gamma","index":[0,1,1],"value":"5"}]}
//! ```
//!
//! For a vector field the index is `[a, s₁, …, s_v]`, for the connection
//! `[a, b, c, s₁, …, s_w]`; the derivative indices `s` are listed in
//! non-decreasing order (one entry per symmetric orbit) and the value is
//! the derivative array entry.  Absent entries are zero.

pub mod natural;
pub mod poly;
pub mod realize;

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use natural::{naturality_check, stable_dim, NaturalityOutcome};
pub use poly::{Dual, Poly, Ring};
pub use realize::{realize, realize_graph, realize_local, Realized};

use crate::graph::json::{parse_label, parse_rational, SCHEMA_VERSION};
use crate::{Error, Result, Q};
use poly::{inverse_map, linear_part, mono_degree, mono_factorial, mono_from_indices, mono_indices};

/// Sparse connection jet: `(a, b, c) ↦ Γ^a_{bc}` as a polynomial.
pub type ConnectionJet<C> = BTreeMap<[usize; 3], Poly<C>>;

/// Jets at the origin of ℝⁿ, truncated at total degree `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetData {
    pub n: usize,
    pub order: usize,
    /// Field label ↦ its `n` components.
    pub fields: BTreeMap<u32, Vec<Poly<Q>>>,
    pub connection: Option<ConnectionJet<Q>>,
}

/// A polynomial coordinate change fixing the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateChange {
    pub n: usize,
    pub phi: Vec<Poly<Q>>,
}

impl CoordinateChange {
    /// Validates `φ(0) = 0` and `det A₁ ≠ 0`.
    pub fn new(phi: Vec<Poly<Q>>) -> Result<CoordinateChange> {
        let n = phi.len();
        if phi.iter().any(|p| p.n != n || !p.at_origin().r_is_zero()) {
            return Err(Error::Domain("coordinate change must fix the origin of ℝⁿ".into()));
        }
        if poly::invert_matrix(&linear_part(&phi)).is_none() {
            return Err(Error::Domain("coordinate change has a non-invertible linear part".into()));
        }
        Ok(CoordinateChange { n, phi })
    }

    pub fn identity(n: usize, order: usize) -> CoordinateChange {
        CoordinateChange { n, phi: (0..n).map(|i| Poly::var(n, order, i)).collect() }
    }

    /// The linear part `A₁`.
    pub fn linear(&self) -> Vec<Vec<Q>> {
        linear_part(&self.phi)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &CoordinateChange) -> CoordinateChange {
        let deg = self.phi.iter().chain(&other.phi).map(|p| p.max_deg).min().unwrap_or(0);
        CoordinateChange { n: self.n, phi: poly::compose_maps(&self.phi, &other.phi, deg) }
    }

    /// Random change with invertible linear part and terms up to `degree`.
    pub fn random<R: Rng>(n: usize, degree: usize, rng: &mut R) -> CoordinateChange {
        loop {
            let phi: Vec<Poly<Q>> = (0..n)
                .map(|_| {
                    let mut p = Poly::zero(n, degree);
                    for m in monomials(n, 1, degree) {
                        p.add_term(m, small_rational(rng));
                    }
                    p
                })
                .collect();
            if let Ok(c) = CoordinateChange::new(phi) {
                return c;
            }
        }
    }
}

/// All exponent vectors in `n` variables with total degree in `lo..=hi`.
pub fn monomials(n: usize, lo: usize, hi: usize) -> Vec<Vec<u16>> {
    fn rec(i: usize, n: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>, lo: usize, hi: usize) {
        if i == n {
            let d = mono_degree(cur);
            if d >= lo && d <= hi {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=left {
            cur.push(e as u16);
            rec(i + 1, n, left - e, cur, out, lo, hi);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, hi, &mut Vec::new(), &mut out, lo, hi);
    out
}

/// A uniformly drawn rational with numerator in `-4..=4` and denominator
/// in `1..=3`.
pub fn small_rational<R: Rng>(rng: &mut R) -> Q {
    Q::new(rng.gen_range(-4i64..=4).into(), rng.gen_range(1i64..=3).into())
}

impl JetData {
    pub fn empty(n: usize, order: usize) -> JetData {
        JetData { n, order, fields: BTreeMap::new(), connection: None }
    }

    /// Dense random jets for the given field labels (and a connection if
    /// requested), every coefficient up to degree `order` drawn independently.
    pub fn random<R: Rng>(n: usize, order: usize, labels: &[u32], connection: bool, rng: &mut R) -> JetData {
        let mono = monomials(n, 0, order);
        let random_poly = |rng: &mut R| {
            let mut p = Poly::zero(n, order);
            for m in &mono {
                p.add_term(m.clone(), small_rational(rng));
            }
            p
        };
        let mut data = JetData::empty(n, order);
        for &l in labels {
            let comps = (0..n).map(|_| random_poly(rng)).collect();
            data.fields.insert(l, comps);
        }
        if connection {
            let mut conn = BTreeMap::new();
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        conn.insert([a, b, c], random_poly(rng));
                    }
                }
            }
            data.connection = Some(conn);
        }
        data
    }

    /// Sparse random connection jets up to degree `order` (used when `n` is
    /// large): a handful of components, each with a few random monomials.
    pub fn random_sparse<R: Rng>(n: usize, order: u32, rng: &mut R) -> JetData {
        let order = order as usize;
        let mut conn: ConnectionJet<Q> = BTreeMap::new();
        for _ in 0..4 {
            let key = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
            let p = conn.entry(key).or_insert_with(|| Poly::zero(n, order));
            for _ in 0..3 {
                let d = rng.gen_range(0..=order);
                let idx: Vec<usize> = (0..d).map(|_| rng.gen_range(0..n)).collect();
                p.add_term(mono_from_indices(n, &idx), nonzero_rational(rng));
            }
        }
        conn.retain(|_, p| !p.is_zero());
        JetData { n, order, fields: BTreeMap::new(), connection: Some(conn) }
    }

    /// The largest label carried by the data, if any.
    pub fn labels(&self) -> Vec<u32> {
        self.fields.keys().copied().collect()
    }

    /// Derivative array entry of a jet coordinate.
    pub fn coordinate(&self, c: &JetCoordinate) -> Result<Q> {
        let (poly, s) = match c {
            JetCoordinate::Field { label, index } => {
                let comps =
                    self.fields.get(label).ok_or_else(|| Error::Domain(format!("jet data lacks field X{label}")))?;
                let a = *index.first().ok_or_else(|| Error::Domain("empty jet index".into()))?;
                (comps.get(a), &index[1..])
            }
            JetCoordinate::Connection { index } => {
                if index.len() < 3 {
                    return Err(Error::Domain("connection index needs a, b, c".into()));
                }
                let conn =
                    self.connection.as_ref().ok_or_else(|| Error::Domain("jet data lacks a connection".into()))?;
                (conn.get(&[index[0], index[1], index[2]]), &index[3..])
            }
        };
        if s.iter().any(|&i| i >= self.n) {
            return Err(Error::Domain("jet index out of range".into()));
        }
        let m = mono_from_indices(self.n, s);
        Ok(poly.map(|p| p.coeff(&m) * mono_factorial(&m)).unwrap_or_else(<Q as Zero>::zero))
    }

    /// Lifts coefficients into another ring.
    fn lift<C: Ring>(&self) -> (BTreeMap<u32, Vec<Poly<C>>>, Option<ConnectionJet<C>>) {
        let fields = self
            .fields
            .iter()
            .map(|(l, v)| (*l, v.iter().map(|p| p.map(|c| C::from_q(c.clone()))).collect()))
            .collect();
        let conn =
            self.connection.as_ref().map(|m| m.iter().map(|(k, p)| (*k, p.map(|c| C::from_q(c.clone())))).collect());
        (fields, conn)
    }

    /// JSON export using the documented sparse layout.
    pub fn to_json(&self) -> serde_json::Value {
        let mut entries = Vec::new();
        let mut push = |field: String, prefix: Vec<usize>, p: &Poly<Q>| {
            for (m, c) in &p.terms {
                let mut index = prefix.clone();
                index.extend(mono_indices(m));
                entries.push(JetEntryJson { field: field.clone(), index, value: (c * mono_factorial(m)).to_string() });
            }
        };
        for (l, comps) in &self.fields {
            for (a, p) in comps.iter().enumerate() {
                push(format!("X{l}"), vec![a], p);
            }
        }
        if let Some(conn) = &self.connection {
            for (k, p) in conn {
                push("Gamma".into(), k.to_vec(), p);
            }
        }
        serde_json::to_value(JetDataJson { schema_version: SCHEMA_VERSION, n: self.n, order: self.order, entries })
            .expect("serialisable")
    }

    /// JSON import; see the module documentation for the layout.
    pub fn from_json_str(text: &str) -> Result<JetData> {
        let j: JetDataJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if j.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported schemaVersion {}", j.schema_version)));
        }
        let n = j.n;
        if n == 0 {
            return Err(Error::Schema("dimension n must be positive".into()));
        }
        let mut data = JetData::empty(n, j.order);
        for e in &j.entries {
            if e.index.iter().any(|&i| i >= n) {
                return Err(Error::Schema(format!("index {:?} out of range for n = {n}", e.index)));
            }
            let value = parse_rational(&e.value)?;
            let (p, s): (&mut Poly<Q>, &[usize]) = if e.field == "Gamma" {
                if e.index.len() < 3 {
                    return Err(Error::Schema("connection entries need [a, b, c, s...]".into()));
                }
                let conn = data.connection.get_or_insert_with(BTreeMap::new);
                let key = [e.index[0], e.index[1], e.index[2]];
                (conn.entry(key).or_insert_with(|| Poly::zero(n, j.order)), &e.index[3..])
            } else {
                let label = parse_label(&e.field)?;
                if e.index.is_empty() {
                    return Err(Error::Schema("vector entries need [a, s...]".into()));
                }
                let comps = data.fields.entry(label).or_insert_with(|| vec![Poly::zero(n, j.order); n]);
                (&mut comps[e.index[0]], &e.index[1..])
            };
            if s.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Schema(format!("derivative indices of {:?} must be non-decreasing", e.index)));
            }
            if s.len() > j.order {
                return Err(Error::Schema(format!("entry {:?} exceeds the truncation order", e.index)));
            }
            let m = mono_from_indices(n, s);
            let coeff = value / mono_factorial(&m);
            if !Zero::is_zero(&p.coeff(&m)) {
                return Err(Error::Schema(format!("duplicate entry {:?}", e.index)));
            }
            p.add_term(m, coeff);
        }
        Ok(data)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct JetDataJson {
    schema_version: u32,
    n: usize,
    order: usize,
    entries: Vec<JetEntryJson>,
}

#[derive(Serialize, Deserialize)]
struct JetEntryJson {
    field: String,
    index: Vec<usize>,
    value: String,
}

/// A jet-fibre coordinate: `X^a_{(s…)}` or `Γ^a_{bc,(s…)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JetCoordinate {
    Field { label: u32, index: Vec<usize> },
    Connection { index: Vec<usize> },
}

fn nonzero_rational<R: Rng>(rng: &mut R) -> Q {
    loop {
        let q = small_rational(rng);
        if !Zero::is_zero(&q) {
            return q;
        }
    }
}

/// Sparse random generator `ξ` with homogeneous parts of degrees
/// `lo..=hi` (two random monomial terms per degree).
pub fn random_sparse_xi<R: Rng>(n: usize, lo: usize, hi: usize, rng: &mut R) -> Vec<Poly<Q>> {
    let mut xi: Vec<Poly<Q>> = (0..n).map(|_| Poly::zero(n, hi)).collect();
    for d in lo..=hi {
        for _ in 0..2 {
            let a = rng.gen_range(0..n);
            let idx: Vec<usize> = (0..d).map(|_| rng.gen_range(0..n)).collect();
            xi[a].add_term(mono_from_indices(n, &idx), nonzero_rational(rng));
        }
    }
    xi
}

/// Dense random generator with homogeneous parts of degrees `lo..=hi`.
pub fn random_xi<R: Rng>(n: usize, lo: usize, hi: usize, rng: &mut R) -> Vec<Poly<Q>> {
    (0..n)
        .map(|_| {
            let mut p = Poly::zero(n, hi);
            for m in monomials(n, lo, hi) {
                p.add_term(m, small_rational(rng));
            }
            p
        })
        .collect()
}

/// Transformation law over an arbitrary coefficient ring.
#[allow(clippy::type_complexity)]
fn transform_generic<C: Ring>(
    n: usize,
    order: usize,
    fields: &BTreeMap<u32, Vec<Poly<C>>>,
    conn: Option<&ConnectionJet<C>>,
    phi: &[Poly<C>],
) -> Result<(BTreeMap<u32, Vec<Poly<C>>>, Option<ConnectionJet<C>>)> {
    let need = order + 2;
    let psi = inverse_map(phi, need)
        .ok_or_else(|| Error::Domain("coordinate change has a non-invertible linear part".into()))?;
    let mut cache = HashMap::new();
    // ∂ᵢφ^a ∘ ψ, kept sparse.
    let mut dphi: Vec<Vec<(usize, Poly<C>)>> = vec![Vec::new(); n];
    for (a, row) in dphi.iter_mut().enumerate() {
        for i in 0..n {
            let d = phi[a].deriv(i);
            if !d.is_zero() {
                let c = d.compose_cached(&psi, order, &mut cache);
                if !c.is_zero() {
                    row.push((i, c));
                }
            }
        }
    }
    let apply_dphi = |v: &BTreeMap<usize, Poly<C>>| -> Vec<Poly<C>> {
        (0..n)
            .map(|a| {
                let mut acc = Poly::zero(n, order);
                for (i, d) in &dphi[a] {
                    if let Some(x) = v.get(i) {
                        acc = acc.add(&d.mul(x));
                    }
                }
                acc
            })
            .collect()
    };
    let mut new_fields = BTreeMap::new();
    for (l, comps) in fields {
        let pulled: BTreeMap<usize, Poly<C>> = comps
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| (i, p.compose_cached(&psi, order, &mut cache)))
            .collect();
        new_fields.insert(*l, apply_dphi(&pulled));
    }
    let new_conn = match conn {
        None => None,
        Some(conn) => {
            // J[j] = [(b, ∂_bψʲ)], H[i] = [((b, c), ∂_b∂_cψⁱ)].
            let jac: Vec<Vec<(usize, Poly<C>)>> = (0..n)
                .map(|j| (0..n).map(|b| (b, psi[j].deriv(b).truncate(order))).filter(|(_, p)| !p.is_zero()).collect())
                .collect();
            let mut t: BTreeMap<[usize; 3], Poly<C>> = BTreeMap::new();
            let mut add_t = |k: [usize; 3], p: Poly<C>| {
                let e = t.entry(k).or_insert_with(|| Poly::zero(n, order));
                *e = e.add(&p);
            };
            for i in 0..n {
                for b in 0..n {
                    let db = psi[i].deriv(b);
                    for c in 0..n {
                        let h = db.deriv(c).truncate(order);
                        if !h.is_zero() {
                            add_t([i, b, c], h);
                        }
                    }
                }
            }
            for (&[i, j, k], g) in conn {
                let gp = g.compose_cached(&psi, order, &mut cache);
                if gp.is_zero() {
                    continue;
                }
                for (b, jb) in &jac[j] {
                    let gb = gp.mul(jb);
                    if gb.is_zero() {
                        continue;
                    }
                    for (c, kc) in &jac[k] {
                        add_t([i, *b, *c], gb.mul(kc));
                    }
                }
            }
            let mut out: ConnectionJet<C> = BTreeMap::new();
            for ([i, b, c], p) in t {
                if p.is_zero() {
                    continue;
                }
                for a in 0..n {
                    for (i2, d) in &dphi[a] {
                        if *i2 == i {
                            let e = out.entry([a, b, c]).or_insert_with(|| Poly::zero(n, order));
                            *e = e.add(&d.mul(&p));
                        }
                    }
                }
            }
            out.retain(|_, p| !p.is_zero());
            Some(out)
        }
    };
    Ok((new_fields, new_conn))
}

/// The pushforward `φ_* data` (active transformation of the jets at the
/// origin).  The change must be known to degree `order + 2`.
pub fn jet_transform(data: &JetData, phi: &CoordinateChange) -> Result<JetData> {
    if phi.n != data.n {
        return Err(Error::Domain(format!("dimension mismatch: data n = {}, change n = {}", data.n, phi.n)));
    }
    if phi.phi.iter().any(|p| p.max_deg < data.order + 2) {
        return Err(Error::Domain("coordinate change is truncated below the data order + 2".into()));
    }
    let (fields, conn) = transform_generic(data.n, data.order, &data.fields, data.connection.as_ref(), &phi.phi)?;
    Ok(JetData { n: data.n, order: data.order, fields, connection: conn })
}

/// `d/dε (id + εξ)_* data` at `ε = 0`, computed over dual numbers.
pub fn infinitesimal_jets(data: &JetData, xi: &[Poly<Q>]) -> Result<JetData> {
    let n = data.n;
    if xi.len() != n {
        return Err(Error::Domain("generator dimension mismatch".into()));
    }
    let deg = data.order + 2;
    let phi: Vec<Poly<Dual>> = (0..n)
        .map(|a| {
            let mut p = Poly::var(n, deg, a);
            for (m, c) in &xi[a].terms {
                p.add_term(m.clone(), Dual::new(<Q as Zero>::zero(), c.clone()));
            }
            p
        })
        .collect();
    let (fields, conn) = data.lift::<Dual>();
    let (f2, c2) = transform_generic(n, data.order, &fields, conn.as_ref(), &phi)?;
    let eps = |p: &Poly<Dual>| p.map(|d| d.eps.clone());
    Ok(JetData {
        n,
        order: data.order,
        fields: f2.iter().map(|(l, v)| (*l, v.iter().map(eps).collect())).collect(),
        connection: c2.map(|m| {
            let mut out: ConnectionJet<Q> = m.iter().map(|(k, p)| (*k, eps(p))).collect();
            out.retain(|_, p| !p.is_zero());
            out
        }),
    })
}

/// The infinitesimal action of the generator `ξ` on one jet coordinate.
pub fn infinitesimal_action(data: &JetData, xi: &[Poly<Q>], coordinate: &JetCoordinate) -> Result<Q> {
    infinitesimal_jets(data, xi)?.coordinate(coordinate)
}

/// The infinitesimal action on all order-`w` connection coordinates, keyed
/// `[a, b, c, s₁ ≤ … ≤ s_w]`.
pub fn infinitesimal_connection(data: &JetData, xi: &[Poly<Q>], w: u32) -> Result<BTreeMap<Vec<usize>, Q>> {
    let d = infinitesimal_jets(data, xi)?;
    let mut out = BTreeMap::new();
    for (k, p) in d.connection.iter().flatten() {
        for (m, c) in &p.terms {
            if mono_degree(m) != w as usize {
                continue;
            }
            let mut key = k.to_vec();
            key.extend(mono_indices(m));
            out.insert(key, c * mono_factorial(m));
        }
    }
    Ok(out)
}

/// `A·v` for a square matrix and a vector.
pub fn mat_vec(a: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    a.iter().map(|row| row.iter().zip(v).fold(<Q as Zero>::zero(), |acc, (x, y)| acc + x * y)).collect()
}

/// Identity-like helper: is every entry zero?
pub fn all_zero(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_change_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = JetData::random(2, 2, &[1, 2], true, &mut rng);
        let id = CoordinateChange::identity(2, 4);
        assert_eq!(jet_transform(&data, &id).unwrap(), data);
    }

    #[test]
    fn linear_change_of_connection() {
        // Γ' = A Γ(A⁻¹·, A⁻¹·) for linear φ = A.
        let n = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = JetData::random(n, 0, &[], true, &mut rng);
        let a = [[q(2), q(1)], [q(0), q(1)]];
        let ainv = [[qf(1, 2), qf(-1, 2)], [q(0), q(1)]];
        let phi: Vec<Poly<Q>> = (0..n)
            .map(|r| {
                let mut p = Poly::zero(n, 2);
                for i in 0..n {
                    p.add_term(mono_from_indices(n, &[i]), a[r][i].clone());
                }
                p
            })
            .collect();
        let out = jet_transform(&data, &CoordinateChange::new(phi).unwrap()).unwrap();
        let g = |d: &JetData, k: [usize; 3]| {
            d.connection.as_ref().unwrap().get(&k).map(|p| p.at_origin()).unwrap_or_default()
        };
        for x in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut expect = Q::zero();
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                expect += &a[x][i] * g(&data, [i, j, k]) * &ainv[j][b] * &ainv[k][c];
                            }
                        }
                    }
                    assert_eq!(g(&out, [x, b, c]), expect);
                }
            }
        }
    }

    #[test]
    fn quadratic_change_shifts_connection() {
        // φ = id + A₂: Γ'(0) = Γ(0) − A₂ (as a derivative array).
        let n = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = JetData::random(n, 0, &[], true, &mut rng);
        let mut phi: Vec<Poly<Q>> = (0..n).map(|i| Poly::var(n, 2, i)).collect();
        phi[0].add_term(vec![1, 1], q(3)); // ∂₀∂₁φ⁰ = 3
        phi[1].add_term(vec![2, 0], q(1)); // ∂₀∂₀φ¹ = 2
        let out = jet_transform(&data, &CoordinateChange::new(phi).unwrap()).unwrap();
        let g = |d: &JetData, k: [usize; 3]| d.coordinate(&JetCoordinate::Connection { index: k.to_vec() }).unwrap();
        assert_eq!(g(&out, [0, 0, 1]), g(&data, [0, 0, 1]) - q(3));
        assert_eq!(g(&out, [0, 1, 0]), g(&data, [0, 1, 0]) - q(3));
        assert_eq!(g(&out, [1, 0, 0]), g(&data, [1, 0, 0]) - q(2));
        assert_eq!(g(&out, [1, 1, 1]), g(&data, [1, 1, 1]));
    }

    #[test]
    fn transform_is_a_group_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..3 {
            let n = 2;
            let order = 2;
            let data = JetData::random(n, order, &[1], true, &mut rng);
            let f = CoordinateChange::random(n, order + 2, &mut rng);
            let g = CoordinateChange::random(n, order + 2, &mut rng);
            let lhs = jet_transform(&data, &f.compose(&g)).unwrap();
            let rhs = jet_transform(&jet_transform(&data, &g).unwrap(), &f).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn infinitesimal_action_on_low_coordinates() {
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = JetData::random(n, 1, &[1], true, &mut rng);
        let xi = random_xi(n, 2, 2, &mut rng);
        // Values of vector fields are invariant.
        for a in 0..n {
            let c = JetCoordinate::Field { label: 1, index: vec![a] };
            assert!(infinitesimal_action(&data, &xi, &c).unwrap().is_zero());
        }
        // δX^a_b = ξ^a_{ib} X^i;  δΓ^a_{bc} = −ξ^a_{bc}.
        let xi_arr = |a: usize, i: usize, b: usize| {
            let m = mono_from_indices(n, &[i, b]);
            xi[a].coeff(&m) * mono_factorial(&m)
        };
        let x0 = |i: usize| data.coordinate(&JetCoordinate::Field { label: 1, index: vec![i] }).unwrap();
        for a in 0..n {
            for b in 0..n {
                let expect = (0..n).fold(<Q as Zero>::zero(), |acc, i| acc + xi_arr(a, i, b) * x0(i));
                let c = JetCoordinate::Field { label: 1, index: vec![a, b] };
                assert_eq!(infinitesimal_action(&data, &xi, &c).unwrap(), expect);
                for cc in 0..n {
                    let c = JetCoordinate::Connection { index: vec![a, b, cc] };
                    assert_eq!(infinitesimal_action(&data, &xi, &c).unwrap(), -xi_arr(a, b, cc));
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data = JetData::random(2, 2, &[1, 3], true, &mut rng);
        let back = JetData::from_json_str(&data.to_json().to_string()).unwrap();
        assert_eq!(back, data);
        assert!(matches!(JetData::from_json_str("{\"n\":1}"), Err(Error::Schema(_))));
    }

    #[test]
    fn singular_change_is_rejected() {
        let n = 2;
        let phi: Vec<Poly<Q>> = vec![Poly::var(n, 2, 0), Poly::var(n, 2, 0)];
        assert!(CoordinateChange::new(phi).is_err());
    }
}
