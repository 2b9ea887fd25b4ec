//! Differential matrices, ranks, kernels and degree-zero cohomology.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::complex::{differential_graph, differential_unchecked, enumerate_basis, BasisSlice, Family};
use crate::graph::{FormalSum, Graph};
use crate::linalg::{rank_fraction_free, Rref, SparseMatrixQ};
use crate::{Error, Result, Q};

/// Matrix of `δ: (family, d, m) → (family, d, m + 1)` in the canonical
/// bases; column `j` holds the coordinates of `δ(basisₘ[j])`.
pub fn delta_matrix(family: Family, d: usize, m: usize) -> Result<SparseMatrixQ> {
    let source = enumerate_basis(family, d, m);
    let target = enumerate_basis(family, d, m + 1);
    matrix_between(&source, &target)
}

/// The differential matrix between two explicit slices.
pub fn matrix_between(source: &BasisSlice, target: &BasisSlice) -> Result<SparseMatrixQ> {
    let columns: Vec<Result<BTreeMap<usize, Q>>> = source
        .graphs
        .par_iter()
        .map(|c| {
            let image = differential_graph(c.graph())?;
            let mut col = BTreeMap::new();
            for (k, v) in image.iter() {
                let row = target.position(k.key()).ok_or_else(|| {
                    Error::BasisIncomplete(format!(
                        "δ of {} produces {} outside the ({}, d={}, m={}) basis",
                        c.key(),
                        k.key(),
                        target.family,
                        target.d,
                        target.m
                    ))
                })?;
                col.insert(row, v.clone());
            }
            Ok(col)
        })
        .collect();
    let mut m = SparseMatrixQ::zeros(target.len(), source.len());
    for (j, col) in columns.into_iter().enumerate() {
        m.columns[j] = col?;
    }
    Ok(m)
}

/// `dim ker(δ⁰)` for the `d`-multilinear slice of the family.
pub fn h0_dimension(family: Family, d: usize) -> Result<usize> {
    let m = delta_matrix(family, d, 0)?;
    Ok(m.cols - m.rank())
}

/// A reduced basis of `ker(δ⁰)`, every element re-verified to be a cocycle.
pub fn kernel_basis(family: Family, d: usize) -> Result<Vec<FormalSum>> {
    let source = enumerate_basis(family, d, 0);
    let m = delta_matrix(family, d, 0)?;
    let mut out = Vec::new();
    for v in m.kernel_basis() {
        let mut s = FormalSum::new();
        for (j, c) in v.iter().enumerate() {
            if !c.is_zero() {
                s.add_class(source.graphs[j].clone(), c.clone());
            }
        }
        if !differential_unchecked(&s)?.is_empty() {
            return Err(Error::Internal("kernel vector is not a cocycle".into()));
        }
        out.push(s);
    }
    Ok(out)
}

/// One diagonal block of `δ⁰` for a wheel family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WheelBlock {
    pub wheel_length: usize,
    pub nabla_count: usize,
    pub cols: usize,
    pub rank: usize,
}

/// The part of `δ⁰` preserving both the number of connection vertices and
/// the number of vertices (of either colour) on the wheel, split into
/// blocks.
pub fn wheel_blocks(family: Family, d: usize) -> Result<Vec<WheelBlock>> {
    let source = enumerate_basis(family, d, 0);
    let target = enumerate_basis(family, d, 1);
    let m = matrix_between(&source, &target)?;
    let grade = |g: &Graph| (g.cycle_length(), g.nabla_count());
    let mut blocks: BTreeMap<(usize, usize), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (j, c) in source.graphs.iter().enumerate() {
        blocks.entry(grade(c.graph())).or_default().0.push(j);
    }
    for (i, c) in target.graphs.iter().enumerate() {
        blocks.entry(grade(c.graph())).or_default().1.push(i);
    }
    let mut out = Vec::new();
    for ((wheel_length, nabla_count), (cols, rows)) in blocks {
        if cols.is_empty() {
            continue;
        }
        let sub = m.submatrix(&rows, &cols);
        out.push(WheelBlock { wheel_length, nabla_count, cols: cols.len(), rank: sub.rank() });
    }
    Ok(out)
}

/// Rank of a list of sparse rows (re-exported convenience).
pub fn rank_of_rows(rows: &[BTreeMap<usize, Q>]) -> usize {
    rank_fraction_free(rows)
}

/// Whether `x` lies in the span of `basis` (all sums in one slice).
pub fn in_span(x: &FormalSum, basis: &[FormalSum]) -> bool {
    let mut keys: BTreeMap<String, usize> = BTreeMap::new();
    let mut index = |k: &str| {
        let n = keys.len();
        *keys.entry(k.to_string()).or_insert(n)
    };
    let rows: Vec<BTreeMap<usize, Q>> =
        basis.iter().map(|b| b.iter().map(|(k, c)| (index(k.key()), c.clone())).collect()).collect();
    let target: BTreeMap<usize, Q> = x.iter().map(|(k, c)| (index(k.key()), c.clone())).collect();
    let mut r = Rref::new(keys.len());
    for row in rows {
        r.insert(row);
    }
    r.contains(&target)
}
