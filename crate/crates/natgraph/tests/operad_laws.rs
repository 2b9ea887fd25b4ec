//! Operad axioms, generators and bracket expansion.

mod common;

use natgraph::complex::{differential, Family};
use natgraph::graph::json::{sum_from_str, sum_to_string};
use natgraph::graph::FormalSum;
use natgraph::homology::{h0_dimension, in_span, kernel_basis, rank_of_rows};
use natgraph::jets::poly::Poly;
use natgraph::jets::realize::{realize, Realized};
use natgraph::jets::JetData;
use natgraph::operad::{b, compose, expand_word, lie_expand, p, sigma_action, Word};
use natgraph::{q, Q};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const INSTANCES: usize = 200;

#[test]
fn unit_laws() {
    common::unit_laws(INSTANCES, 11).unwrap();
}

#[test]
fn sequential_associativity() {
    common::sequential_associativity(INSTANCES, 12).unwrap();
}

#[test]
fn parallel_associativity() {
    common::parallel_associativity(INSTANCES, 13).unwrap();
}

#[test]
fn equivariance() {
    common::equivariance(INSTANCES, 14).unwrap();
}

#[test]
fn right_action_composes() {
    common::right_action(INSTANCES, 16).unwrap();
}

#[test]
fn monomial_count_is_blacks_to_the_inputs() {
    common::monomial_counts(INSTANCES, 17).unwrap();
}

#[test]
fn pre_lie_associator_is_the_symmetric_cherry() {
    let p = p();
    let assoc = compose(&p, 1, &p).unwrap().combine(&compose(&p, 2, &p).unwrap(), &q(1), &q(-1)).unwrap();
    let cherry = FormalSum::from_graph(&common::tree(&[(1, None), (2, Some(1)), (3, Some(1))])).unwrap();
    assert_eq!(*assoc.sum(), cherry);
    assert_eq!(sigma_action(&assoc, &[1, 3, 2]).unwrap(), assoc);
}

#[test]
fn jacobi_combination_expands_to_zero() {
    let mut s = FormalSum::new();
    for w in ["(b (b X1 X2) X3)", "(b (b X2 X3) X1)", "(b (b X3 X1) X2)"] {
        s.add_scaled(lie_expand(w).unwrap().sum(), &q(1));
    }
    assert!(s.is_empty(), "{}", sum_to_string(&s));
}

/// Commutator of polynomial vector fields, `[X, Y]ᵃ = Xᵇ∂_bYᵃ − Yᵇ∂_bXᵃ`.
fn commutator(x: &[Poly<Q>], y: &[Poly<Q>]) -> Vec<Poly<Q>> {
    let n = x.len();
    (0..n)
        .map(|a| {
            let mut out = Poly::zero(x[0].n, x[0].max_deg);
            for b in 0..n {
                out = out.add(&x[b].mul(&y[a].deriv(b))).sub(&y[b].mul(&x[a].deriv(b)));
            }
            out
        })
        .collect()
}

#[test]
fn double_bracket_matches_golden_and_commutators() {
    let got = lie_expand("(b (b X1 X2) X3)").unwrap();
    let by_hand = common::double_bracket_by_hand();
    assert_eq!(*got.sum(), by_hand);
    let golden = sum_from_str(include_str!("golden/double_bracket.json")).unwrap();
    assert_eq!(golden, by_hand);
    assert_eq!(golden.len(), 6);

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let data = JetData::random(3, 3, &[1, 2, 3], false, &mut rng);
        let f = |l: u32| data.fields[&l].clone();
        let oracle = commutator(&commutator(&f(1), &f(2)), &f(3));
        let want: Vec<Q> = oracle.iter().map(|c| c.at_origin()).collect();
        assert_eq!(realize(got.sum(), &data).unwrap(), Realized::Vector(want));
    }
}

/// All words in `leaves` (in every order) with both operations.
fn all_words(leaves: &[u32], with_star: bool) -> Vec<Word> {
    if leaves.len() == 1 {
        return vec![Word::Var(leaves[0])];
    }
    let mut out = Vec::new();
    let n = leaves.len();
    // Every split of the set into an ordered pair of non-empty parts.
    for mask in 1..(1u32 << n) - 1 {
        let left: Vec<u32> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| leaves[k]).collect();
        let right: Vec<u32> = (0..n).filter(|k| mask >> k & 1 == 0).map(|k| leaves[k]).collect();
        for a in all_words(&left, with_star) {
            for b in all_words(&right, with_star) {
                out.push(Word::bracket(a.clone(), b.clone()));
                if with_star {
                    out.push(Word::star(a.clone(), b));
                }
            }
        }
    }
    out
}

fn rank_of(sums: &[FormalSum]) -> usize {
    let mut keys = std::collections::BTreeMap::new();
    let rows: Vec<_> = sums
        .iter()
        .map(|s| {
            s.iter()
                .map(|(k, c)| {
                    let n = keys.len();
                    (*keys.entry(k.key().to_string()).or_insert(n), c.clone())
                })
                .collect()
        })
        .collect();
    rank_of_rows(&rows)
}

#[test]
fn bracket_words_are_cocycles_and_span_h0() {
    for d in 1..=4u32 {
        let leaves: Vec<u32> = (1..=d).collect();
        let images: Vec<FormalSum> =
            all_words(&leaves, false).iter().map(|w| expand_word(w).unwrap().into_sum()).collect();
        for x in &images {
            assert!(differential(x, Family::Bullet).unwrap().is_empty());
        }
        let h0 = h0_dimension(Family::Bullet, d as usize).unwrap();
        assert_eq!(rank_of(&images), h0);
        for k in kernel_basis(Family::Bullet, d as usize).unwrap() {
            assert!(in_span(&k, &images));
        }
    }
}

#[test]
fn mixed_words_are_cocycles() {
    for d in 1..=4u32 {
        let leaves: Vec<u32> = (1..=d).collect();
        let words = all_words(&leaves, true);
        for w in &words {
            let x = expand_word(w).unwrap();
            assert!(differential(x.sum(), Family::BulletNabla1).unwrap().is_empty(), "{w}");
        }
    }
}

#[test]
fn bracket_is_the_antisymmetrised_pre_lie_product() {
    let p = p();
    let pt = sigma_action(&p, &[2, 1]).unwrap();
    assert_eq!(b(), pt.combine(&p, &q(1), &q(-1)).unwrap());
}
