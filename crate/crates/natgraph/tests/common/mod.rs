//! Helpers shared by the integration suites and the acceptance harness.
#![allow(dead_code)]

use natgraph::complex::{enumerate_basis, Family};
use natgraph::graph::{FormalSum, Graph, Slot, VertexKind};
use natgraph::operad::{compose, compose_monomials, sigma_action, unit, OperadElement};
use natgraph::q;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random arity-1..3 element of the degree-zero Bullet slice: one or two
/// basis graphs with small positive coefficients.
pub fn random_element(rng: &mut ChaCha8Rng) -> OperadElement {
    let d = rng.gen_range(1..=3);
    let basis = enumerate_basis(Family::Bullet, d, 0);
    let mut s = FormalSum::new();
    for _ in 0..rng.gen_range(1..=2) {
        let j = rng.gen_range(0..basis.len());
        s.add_scaled(&basis.element(j), &q(rng.gen_range(1..=3)));
    }
    OperadElement::new(s, d).unwrap()
}

/// A uniformly random permutation of `1..=d`, listed as `σ(1), …, σ(d)`.
pub fn random_permutation(d: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=d).collect();
    for i in (1..d).rev() {
        v.swap(i, rng.gen_range(0..=i));
    }
    v
}

/// An anchored tree of vector fields given as `(label, parent label)`
/// pairs; the vertex without parent feeds the anchor.
pub fn tree(parent_of: &[(u32, Option<u32>)]) -> Graph {
    let mut g = Graph::empty();
    let ids: Vec<usize> = parent_of
        .iter()
        .map(|(l, _)| {
            let deriv = parent_of.iter().filter(|(_, p)| *p == Some(*l)).count() as u32;
            g.add_vertex(VertexKind::Vector { label: *l, deriv })
        })
        .collect();
    let a = g.add_vertex(VertexKind::Anchor);
    for (k, (_, p)) in parent_of.iter().enumerate() {
        let to = match p {
            None => a,
            Some(pl) => ids[parent_of.iter().position(|(l, _)| l == pl).unwrap()],
        };
        g.connect(ids[k], to, Slot::Sym);
    }
    g
}

/// `X₁ → ■` next to the divergence wheel of `X₂`.
pub fn times_divergence() -> Graph {
    let mut g = Graph::empty();
    let x = g.add_vertex(VertexKind::Vector { label: 1, deriv: 0 });
    let a = g.add_vertex(VertexKind::Anchor);
    let y = g.add_vertex(VertexKind::Vector { label: 2, deriv: 1 });
    g.connect(x, a, Slot::Sym);
    g.connect(y, y, Slot::Sym);
    g
}

/// The double bracket written out by hand from
/// `[[X,Y],Z] = [X,Y]·∂Z − Z·∂(X·∂Y − Y·∂X)`.
pub fn double_bracket_by_hand() -> FormalSum {
    let mut s = FormalSum::new();
    let terms: [(&[(u32, Option<u32>)], i64); 6] = [
        (&[(3, None), (2, Some(3)), (1, Some(2))], 1),
        (&[(3, None), (1, Some(3)), (2, Some(1))], -1),
        (&[(2, None), (1, Some(2)), (3, Some(1))], -1),
        (&[(2, None), (1, Some(2)), (3, Some(2))], -1),
        (&[(1, None), (2, Some(1)), (3, Some(2))], 1),
        (&[(1, None), (2, Some(1)), (3, Some(1))], 1),
    ];
    for (t, c) in terms {
        s.add_graph(&tree(t), &q(c)).unwrap();
    }
    s
}

type Check = Result<(), String>;

fn expect_eq(a: &OperadElement, b: &OperadElement, what: &str, k: usize) -> Check {
    if a == b {
        Ok(())
    } else {
        Err(format!("{what} fails on instance {k}"))
    }
}

/// `1 ∘₁ G = G` and `G ∘ᵢ 1 = G`.
pub fn unit_laws(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..instances {
        let g = random_element(&mut rng);
        expect_eq(&compose(&unit(), 1, &g).unwrap(), &g, "left unit", k)?;
        for i in 1..=g.arity() {
            expect_eq(&compose(&g, i, &unit()).unwrap(), &g, "right unit", k)?;
        }
    }
    Ok(())
}

/// `(λ ∘ᵢ μ) ∘_{i+j−1} ν = λ ∘ᵢ (μ ∘ⱼ ν)`.
pub fn sequential_associativity(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..instances {
        let (l, m, n) = (random_element(&mut rng), random_element(&mut rng), random_element(&mut rng));
        let i = rng.gen_range(1..=l.arity());
        let j = rng.gen_range(1..=m.arity());
        let left = compose(&compose(&l, i, &m).unwrap(), i + j - 1, &n).unwrap();
        let right = compose(&l, i, &compose(&m, j, &n).unwrap()).unwrap();
        expect_eq(&left, &right, "sequential associativity", k)?;
    }
    Ok(())
}

/// `(λ ∘ᵢ μ) ∘_{k+|μ|−1} ν = (λ ∘ₖ ν) ∘ᵢ μ` for `i < k`.
pub fn parallel_associativity(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < instances {
        let (l, m, n) = (random_element(&mut rng), random_element(&mut rng), random_element(&mut rng));
        if l.arity() < 2 {
            continue;
        }
        let i = rng.gen_range(1..l.arity());
        let k = rng.gen_range(i + 1..=l.arity());
        let left = compose(&compose(&l, i, &m).unwrap(), k + m.arity() - 1, &n).unwrap();
        let right = compose(&compose(&l, k, &n).unwrap(), i, &m).unwrap();
        expect_eq(&left, &right, "parallel associativity", checked)?;
        checked += 1;
    }
    Ok(())
}

/// `(μσ) ∘ᵢ ν = (μ ∘_{σ(i)} ν)·τ` and `μ ∘ᵢ (νσ) = (μ ∘ᵢ ν)·τ′`, where `τ`
/// and `τ′` send each label on the left to the label the same vertex
/// carries on the right.
pub fn equivariance(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..instances {
        let (mu, nu) = (random_element(&mut rng), random_element(&mut rng));
        let (u, v) = (mu.arity(), nu.arity());
        let i = rng.gen_range(1..=u);

        let sigma = random_permutation(u, &mut rng);
        let si = sigma[i - 1];
        let mut tau = vec![0; u + v - 1];
        for kk in (1..=u).filter(|&kk| kk != i) {
            let l1 = if kk < i { kk } else { kk + v - 1 };
            let sk = sigma[kk - 1];
            tau[l1 - 1] = if sk < si { sk } else { sk + v - 1 };
        }
        for l in 1..=v {
            tau[l + i - 2] = l + si - 1;
        }
        let left = compose(&sigma_action(&mu, &sigma).unwrap(), i, &nu).unwrap();
        let right = sigma_action(&compose(&mu, si, &nu).unwrap(), &tau).unwrap();
        expect_eq(&left, &right, "outer equivariance", k)?;

        let sigma = random_permutation(v, &mut rng);
        let mut tau: Vec<usize> = (1..=u + v - 1).collect();
        for l in 1..=v {
            tau[l + i - 2] = sigma[l - 1] + i - 1;
        }
        let left = compose(&mu, i, &sigma_action(&nu, &sigma).unwrap()).unwrap();
        let right = sigma_action(&compose(&mu, i, &nu).unwrap(), &tau).unwrap();
        expect_eq(&left, &right, "inner equivariance", k)?;
    }
    Ok(())
}

/// `(G·σ)·τ = G·(στ)`.
pub fn right_action(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..instances {
        let g = random_element(&mut rng);
        let d = g.arity();
        let (s, t) = (random_permutation(d, &mut rng), random_permutation(d, &mut rng));
        let st: Vec<usize> = (0..d).map(|j| s[t[j] - 1]).collect();
        let twice = sigma_action(&sigma_action(&g, &s).unwrap(), &t).unwrap();
        expect_eq(&twice, &sigma_action(&g, &st).unwrap(), "right action", k)?;
    }
    Ok(())
}

/// One monomial per map from the inputs of `X′ᵢ` to the blacks of `G″`.
pub fn monomial_counts(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..instances {
        let (mu, nu) = (random_element(&mut rng), random_element(&mut rng));
        let i = rng.gen_range(1..=mu.arity());
        let gm = mu.sum().iter().next().unwrap().0.graph();
        let gn = nu.sum().iter().next().unwrap().0.graph();
        let xi = gm.find_label(i as u32).unwrap();
        let inputs = gm.edges.iter().filter(|e| e.to == xi).count() as u32;
        let blacks = gn.vertices.iter().filter(|k| k.is_black()).count();
        if compose_monomials(gm, i, gn).unwrap().len() != blacks.pow(inputs) {
            return Err(format!("monomial count fails on instance {k}"));
        }
    }
    Ok(())
}
