//! Graph complexes for natural differential operators.
//!
//! Natural operators built from vector fields and a linear connection are
//! encoded as formal rational combinations of typed directed graphs.  Black
//! vertices hold jets of the fields, white vertices hold generators of the
//! nilpotent part of the jet group, and a local replacement rule for every
//! vertex kind assembles into a differential `δ` with `δ² = 0`.  Degree-zero
//! cohomology is the space of natural operators in the stable range.
//!
//! The crate is organised in layers:
//!
//! * [`graph`] — the graph data model, canonical forms with orientation
//!   signs, formal sums over ℚ, JSON and DOT interchange;
//! * [`rules`] — replacement templates for white, vector-field and
//!   connection vertices, including the derivation of connection rules of
//!   higher derivative order from the jet-group action;
//! * [`complex`] — graph families, basis enumeration and the differential;
//! * [`homology`] — exact linear algebra: differential matrices, ranks,
//!   kernels and `H⁰`;
//! * [`operad`] — partial compositions, symmetric-group actions, bracket
//!   expansion and the trace map;
//! * [`jets`] — an independent analytic oracle: tensor realisation of
//!   graphs, jet transformations under coordinate changes and the
//!   naturality check;
//! * [`genfun`] — exact generating-function identities for the dimension
//!   sequences.
//!
//! All arithmetic is exact; there is no floating point anywhere.

pub mod complex;
pub mod genfun;
pub mod graph;
pub mod homology;
pub mod jets;
pub mod linalg;
pub mod operad;
pub mod rules;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalars used for every coefficient in the crate.
pub type Q = BigRational;

/// Builds a rational from a small integer.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Builds the rational `n / d`.
///
/// # Panics
/// Panics when `d == 0`.
pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Errors surfaced by the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The graph violates one or more structural invariants.
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<graph::Violation>),
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A differential produced a graph that is missing from the target basis.
    #[error("basis incomplete: {0}")]
    BasisIncomplete(String),
    /// Malformed external input (JSON, bracket words, ...).
    #[error("schema error: {0}")]
    Schema(String),
    /// An internal consistency check failed; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

/// Convenience alias for results carrying [`Error`].
pub type Result<T> = std::result::Result<T, Error>;
