//! Naturality oracle: a degree-zero sum is natural iff its realisation
//! commutes with coordinate changes fixing the origin.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::realize::{realize, Realized};
use super::{jet_transform, mat_vec, CoordinateChange, JetData};
use crate::complex::Family;
use crate::graph::FormalSum;
use crate::{Error, Result};

/// Result of a naturality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NaturalityOutcome {
    Pass,
    /// The first failing trial, with the realisation on transformed data
    /// and the transformed realisation of the original data.
    Counterexample {
        trial: usize,
        transformed_data: Realized,
        transformed_value: Realized,
    },
}

impl NaturalityOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, NaturalityOutcome::Pass)
    }
}

/// The smallest dimension in which the degree-zero graphs of a family are
/// faithfully realised: the maximal edge count of its degree-zero graphs.
pub fn stable_dim(family: Family, d: usize) -> usize {
    let bound = match family {
        Family::Bullet | Family::BulletConnected | Family::BulletWheel => d,
        Family::BulletNabla1 | Family::BulletNabla => (2 * d).saturating_sub(1),
        Family::BulletNablaWheel => 2 * d,
        Family::BulletNablaTrace => 2 * d + 1,
    };
    bound.max(1)
}

/// The random generator for one trial: the seed fixes the key, the trial
/// number selects the stream, so results do not depend on scheduling.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Random jet data suited to the sum `x`: every field label it uses, a
/// connection if it has `∇` vertices, truncation order max derivOrder + 1.
pub fn random_data_for(x: &FormalSum, n: usize, rng: &mut ChaCha8Rng) -> JetData {
    let mut labels = std::collections::BTreeSet::new();
    let mut nabla = false;
    let mut max_deriv = 0;
    for (k, _) in x.iter() {
        labels.extend(k.graph().labels());
        nabla |= k.graph().nabla_count() > 0;
        max_deriv = max_deriv.max(k.graph().max_deriv());
    }
    let labels: Vec<u32> = labels.into_iter().collect();
    JetData::random(n, max_deriv as usize + 1, &labels, nabla, rng)
}

/// Checks `realize(x, φ_* data) = φ_*(realize(x, data))` on `trials`
/// seeded random draws of jet data and coordinate changes in dimension `n`.
pub fn naturality_check(x: &FormalSum, n: usize, trials: usize, seed: u64) -> Result<NaturalityOutcome> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let results: Vec<Result<Option<NaturalityOutcome>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let data = random_data_for(x, n, &mut rng);
            let phi = CoordinateChange::random(n, data.order + 2, &mut rng);
            let lhs = realize(x, &jet_transform(&data, &phi)?)?;
            let rhs = match realize(x, &data)? {
                Realized::Vector(v) => Realized::Vector(mat_vec(&phi.linear(), &v)),
                s => s,
            };
            Ok((lhs != rhs).then_some(NaturalityOutcome::Counterexample {
                trial,
                transformed_data: lhs,
                transformed_value: rhs,
            }))
        })
        .collect();
    for r in results {
        if let Some(c) = r? {
            return Ok(c);
        }
    }
    Ok(NaturalityOutcome::Pass)
}
