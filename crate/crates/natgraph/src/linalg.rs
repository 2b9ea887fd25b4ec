//! Exact sparse linear algebra over ℚ.
//!
//! Ranks are computed by fraction-free elimination on integer rows (each
//! row is scaled to integers and kept primitive by dividing out the content
//! after every update).  Kernels use a sparse reduced row echelon form over
//! ℚ so that kernel bases are reproducible.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::Q;

/// A sparse matrix stored by columns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrixQ {
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<BTreeMap<usize, Q>>,
}

impl SparseMatrixQ {
    pub fn zeros(rows: usize, cols: usize) -> SparseMatrixQ {
        SparseMatrixQ { rows, cols, columns: vec![BTreeMap::new(); cols] }
    }

    /// Adds `v` to entry `(r, c)`, dropping resulting zeros.
    pub fn add(&mut self, r: usize, c: usize, v: &Q) {
        assert!(r < self.rows && c < self.cols, "entry out of range");
        let e = self.columns[c].entry(r).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            self.columns[c].remove(&r);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.columns[c].get(&r).cloned().unwrap_or_else(Q::zero)
    }

    /// Non-zero entries as `(row, col, value)` triplets in column order.
    pub fn triplets(&self) -> Vec<(usize, usize, Q)> {
        let mut out = Vec::new();
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                out.push((*r, c, v.clone()));
            }
        }
        out
    }

    /// Rows as sparse maps.
    pub fn row_maps(&self) -> Vec<BTreeMap<usize, Q>> {
        let mut rows = vec![BTreeMap::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                rows[*r].insert(c, v.clone());
            }
        }
        rows
    }

    /// Restriction to the given rows and columns (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMatrixQ {
        let mut rmap = BTreeMap::new();
        for (i, &r) in rows.iter().enumerate() {
            rmap.insert(r, i);
        }
        let mut m = SparseMatrixQ::zeros(rows.len(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for (r, v) in &self.columns[c] {
                if let Some(&i) = rmap.get(r) {
                    m.columns[j].insert(i, v.clone());
                }
            }
        }
        m
    }

    /// Matrix–vector product.
    pub fn mul_vec(&self, x: &[Q]) -> Vec<Q> {
        let mut y = vec![Q::zero(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            if x[c].is_zero() {
                continue;
            }
            for (r, v) in col {
                y[*r] += v * &x[c];
            }
        }
        y
    }

    /// Exact rank by fraction-free elimination.
    pub fn rank(&self) -> usize {
        rank_fraction_free(&self.row_maps())
    }

    /// A basis of the right kernel, read off the reduced row echelon form:
    /// one vector per free column, with a `1` in that column.
    pub fn kernel_basis(&self) -> Vec<Vec<Q>> {
        let mut rref = Rref::new(self.cols);
        for row in self.row_maps() {
            rref.insert(row.into_iter().collect());
        }
        rref.kernel()
    }
}

/// Scales a rational row to a primitive integer row.
fn integer_row(row: &BTreeMap<usize, Q>) -> Vec<(usize, BigInt)> {
    let mut lcm = BigInt::one();
    for v in row.values() {
        lcm = lcm.lcm(v.denom());
    }
    let ints: Vec<(usize, BigInt)> =
        row.iter().filter(|(_, v)| !v.is_zero()).map(|(c, v)| (*c, v.numer() * (&lcm / v.denom()))).collect();
    primitive(ints)
}

fn primitive(mut row: Vec<(usize, BigInt)>) -> Vec<(usize, BigInt)> {
    let mut g = BigInt::zero();
    for (_, v) in &row {
        g = g.gcd(v);
    }
    if !g.is_zero() && !g.is_one() {
        for (_, v) in &mut row {
            *v = &*v / &g;
        }
    }
    row
}

/// `p·r − a·s` for sparse integer rows sorted by column.
fn combine_int(r: &[(usize, BigInt)], p: &BigInt, s: &[(usize, BigInt)], a: &BigInt) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(r.len() + s.len());
    let (mut i, mut j) = (0, 0);
    while i < r.len() || j < s.len() {
        let take_r = j >= s.len() || (i < r.len() && r[i].0 < s[j].0);
        let take_s = i >= r.len() || (j < s.len() && s[j].0 < r[i].0);
        if take_r {
            out.push((r[i].0, p * &r[i].1));
            i += 1;
        } else if take_s {
            out.push((s[j].0, -(a * &s[j].1)));
            j += 1;
        } else {
            let v = p * &r[i].1 - a * &s[j].1;
            if !v.is_zero() {
                out.push((r[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rank of a set of sparse rational rows by fraction-free elimination.
pub fn rank_fraction_free(rows: &[BTreeMap<usize, Q>]) -> usize {
    let mut pivots: BTreeMap<usize, Vec<(usize, BigInt)>> = BTreeMap::new();
    for row in rows {
        let mut r = integer_row(row);
        while let Some((lead, a)) = r.first().cloned() {
            match pivots.get(&lead) {
                None => {
                    if a.is_negative() {
                        for (_, v) in &mut r {
                            *v = -&*v;
                        }
                    }
                    pivots.insert(lead, r);
                    break;
                }
                Some(prow) => {
                    let p = prow[0].1.clone();
                    let g = p.gcd(&a);
                    r = primitive(combine_int(&r, &(&p / &g), prow, &(&a / &g)));
                }
            }
        }
    }
    pivots.len()
}

/// Incrementally maintained sparse reduced row echelon form over ℚ.
#[derive(Clone, Debug)]
pub struct Rref {
    cols: usize,
    /// Pivot column → row (normalised so the pivot entry is 1).
    rows: BTreeMap<usize, BTreeMap<usize, Q>>,
}

impl Rref {
    pub fn new(cols: usize) -> Rref {
        Rref { cols, rows: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the current pivots.
    fn reduce(&self, mut row: BTreeMap<usize, Q>) -> BTreeMap<usize, Q> {
        let cols: Vec<usize> = row.keys().copied().filter(|c| self.rows.contains_key(c)).collect();
        for c in cols {
            let Some(f) = row.get(&c).cloned() else {
                continue;
            };
            let prow = &self.rows[&c];
            for (k, v) in prow {
                let e = row.entry(*k).or_insert_with(Q::zero);
                *e -= &f * v;
                if e.is_zero() {
                    row.remove(k);
                }
            }
        }
        row
    }

    /// Inserts a row; returns `true` if it was independent of the others.
    pub fn insert(&mut self, row: BTreeMap<usize, Q>) -> bool {
        let mut row = self.reduce(row.into_iter().filter(|(_, v)| !v.is_zero()).collect());
        let Some((&lead, lv)) = row.iter().next() else {
            return false;
        };
        let inv = Q::one() / lv.clone();
        for v in row.values_mut() {
            *v *= &inv;
        }
        for other in self.rows.values_mut() {
            if let Some(f) = other.get(&lead).cloned() {
                for (k, v) in &row {
                    let e = other.entry(*k).or_insert_with(Q::zero);
                    *e -= &f * v;
                    if e.is_zero() {
                        other.remove(k);
                    }
                }
            }
        }
        self.rows.insert(lead, row);
        true
    }

    /// Whether `row` lies in the row space.
    pub fn contains(&self, row: &BTreeMap<usize, Q>) -> bool {
        self.reduce(row.clone()).is_empty()
    }

    /// Pivot rows keyed by pivot column.
    pub fn pivot_rows(&self) -> &BTreeMap<usize, BTreeMap<usize, Q>> {
        &self.rows
    }

    /// Basis of the null space of the row space (one vector per free column).
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let mut out = Vec::new();
        for f in 0..self.cols {
            if self.rows.contains_key(&f) {
                continue;
            }
            let mut v = vec![Q::zero(); self.cols];
            v[f] = Q::one();
            for (p, row) in &self.rows {
                if let Some(x) = row.get(&f) {
                    v[*p] = -x.clone();
                }
            }
            out.push(v);
        }
        out
    }

    /// Solves `A x = b` where the last column of every inserted row holds
    /// `b`.  Returns `None` when the system is inconsistent or when the
    /// solution is not unique.
    pub fn unique_solution(&self) -> Option<Vec<Q>> {
        let n = self.cols - 1;
        if self.rows.contains_key(&n) || self.rows.len() != n {
            return None;
        }
        Some((0..n).map(|c| self.rows[&c].get(&n).cloned().unwrap_or_else(Q::zero)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    fn mat(rows: &[&[i64]]) -> SparseMatrixQ {
        let cols = rows[0].len();
        let mut m = SparseMatrixQ::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.add(r, c, &q(v));
            }
        }
        m
    }

    #[test]
    fn rank_and_kernel_of_small_matrix() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn rank_of_identity_and_zero() {
        assert_eq!(mat(&[&[1, 0], &[0, 1]]).rank(), 2);
        assert_eq!(mat(&[&[0, 0], &[0, 0]]).rank(), 0);
        assert_eq!(SparseMatrixQ::zeros(0, 3).kernel_basis().len(), 3);
    }

    #[test]
    fn unique_solution_of_square_system() {
        let mut r = Rref::new(3);
        r.insert([(0, q(1)), (1, q(1)), (2, q(3))].into_iter().collect());
        r.insert([(0, q(1)), (1, q(-1)), (2, q(1))].into_iter().collect());
        assert_eq!(r.unique_solution(), Some(vec![q(2), q(1)]));
    }
}
