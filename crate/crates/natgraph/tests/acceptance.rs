//! Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.  All arithmetic is exact.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use natgraph::complex::{d_squared_zero, differential_unchecked, enumerate_basis, Family};
use natgraph::genfun::{dual_consistency, g_functional, g_recursion};
use natgraph::graph::{FormalSum, VertexKind};
use natgraph::homology::{h0_dimension, in_span, kernel_basis, wheel_blocks};
use natgraph::jets::natural::{naturality_check, random_data_for, stable_dim, trial_rng};
use natgraph::jets::realize::realize;
use natgraph::operad::{b, chain_graph, compose, lie_expand, nabla_graph, p, sigma_action, trace_sum};
use natgraph::q;
use natgraph::rules::{derive_connection_rule, replace_connection};
use num_bigint::BigInt;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn lie_dimensions() -> Outcome {
    let dims: Vec<usize> = (1..=4).map(|d| h0_dimension(Family::Bullet, d).unwrap()).collect();
    let want: Vec<usize> = (1..=4).map(|d| factorial(d - 1)).collect();
    ensure(dims == want, format!("h0(bullet, 1..4) = {dims:?}, expected {want:?}"))?;
    Ok(format!("h0(bullet, 1..4) = {dims:?}"))
}

fn worked_example() -> Outcome {
    let size = enumerate_basis(Family::Bullet, 2, 0).len();
    ensure(size == 4, format!("dim Gr0(bullet, 2) = {size}"))?;
    let kernel = kernel_basis(Family::Bullet, 2).unwrap();
    ensure(kernel.len() == 1, format!("kernel dimension {}", kernel.len()))?;
    ensure(in_span(b().sum(), &kernel), "kernel is not spanned by the bracket")?;
    Ok("dim 4, kernel spanned by b".into())
}

fn connection_dimensions() -> Outcome {
    let dims: Vec<usize> = (1..=3).map(|d| h0_dimension(Family::BulletNabla1, d).unwrap()).collect();
    ensure(dims == [1, 3, 26], format!("h0(bullet-nabla-1, 1..3) = {dims:?}"))?;
    Ok(format!("h0(bullet-nabla-1, 1..3) = {dims:?}"))
}

fn wheel_acyclicity() -> Outcome {
    let dims: Vec<usize> = (1..=4).map(|d| h0_dimension(Family::BulletWheel, d).unwrap()).collect();
    ensure(dims.iter().all(|&x| x == 0), format!("h0(bullet-wheel, 1..4) = {dims:?}"))?;
    let mut blocks = 0;
    for d in 1..=3 {
        for blk in wheel_blocks(Family::BulletWheel, d).unwrap() {
            ensure(blk.rank == blk.cols, format!("d={d} block {blk:?} is not injective"))?;
            blocks += 1;
        }
    }
    Ok(format!("h0 = {dims:?}, {blocks} fixed-wheel blocks injective"))
}

fn cochain_property() -> Outcome {
    let mut checked = 0;
    for family in [Family::Bullet, Family::BulletWheel, Family::BulletNabla1, Family::BulletNablaWheel] {
        for d in 1..=4 {
            let report = d_squared_zero(family, d).unwrap();
            ensure(report.passed(), format!("δ² ≠ 0 on {} graphs of {family} d={d}", report.failures.len()))?;
            checked += report.checked;
        }
    }
    let high_order = [Family::BulletNabla1, Family::BulletNablaWheel]
        .iter()
        .flat_map(|&f| (0..=1).map(move |m| enumerate_basis(f, 4, m)))
        .map(|slice| {
            slice
                .graphs
                .iter()
                .filter(|c| {
                    c.graph().vertices.iter().any(|k| matches!(k, VertexKind::Connection { deriv } if *deriv >= 2))
                })
                .count()
        })
        .sum::<usize>();
    ensure(high_order > 0, "no graph exercises a connection rule of order ≥ 2")?;
    Ok(format!("{checked} basis graphs, {high_order} with ∇ of order ≥ 2"))
}

fn rule_regression() -> Outcome {
    for (w, n) in [(0, 4), (1, 6)] {
        let derived = derive_connection_rule(w, n).unwrap();
        let written = replace_connection(w).unwrap();
        ensure(derived.signature() == written.signature(), format!("order {w} rule differs"))?;
    }
    Ok("orders 0 and 1 reproduced".into())
}

fn generating_functions() -> Outcome {
    let rec = g_recursion(12).unwrap();
    let fun = g_functional(12).unwrap();
    ensure(rec == fun, "recursion and functional equation disagree")?;
    ensure(dual_consistency(12).unwrap(), "q(−g(t)) ≠ −t")?;
    let h0: Vec<BigInt> = (1..=3).map(|d| BigInt::from(h0_dimension(Family::BulletNabla1, d).unwrap())).collect();
    ensure(rec[..3] == h0[..], format!("g1..g3 = {:?} but h0 = {h0:?}", &rec[..3]))?;
    Ok(format!("g1..g12 agree, g1..g3 = {:?}", &rec[..3]))
}

fn operad_laws() -> Outcome {
    common::unit_laws(200, 1)?;
    common::sequential_associativity(200, 2)?;
    common::parallel_associativity(200, 3)?;
    common::equivariance(200, 4)?;
    let p = p();
    let p1 = compose(&p, 1, &p).unwrap();
    let p2 = compose(&p, 2, &p).unwrap();
    let chain = common::tree(&[(1, None), (2, Some(1)), (3, Some(2))]);
    let cherry = common::tree(&[(1, None), (2, Some(1)), (3, Some(1))]);
    let mut want1 = FormalSum::from_graph(&chain).unwrap();
    want1.add_graph(&cherry, &q(1)).unwrap();
    ensure(*p1.sum() == want1, "p ∘₁ p differs from the displayed pair")?;
    ensure(*p2.sum() == FormalSum::from_graph(&chain).unwrap(), "p ∘₂ p differs from the chain")?;
    let assoc = p1.combine(&p2, &q(1), &q(-1)).unwrap();
    ensure(sigma_action(&assoc, &[1, 3, 2]).unwrap() == assoc, "associator not symmetric in 2, 3")?;
    let mut jacobi = FormalSum::new();
    for w in ["(b (b X1 X2) X3)", "(b (b X2 X3) X1)", "(b (b X3 X1) X2)"] {
        jacobi.add_scaled(lie_expand(w).unwrap().sum(), &q(1));
    }
    ensure(jacobi.is_empty(), "Jacobi combination does not vanish")?;
    Ok("unit, associativity, equivariance (200 each), displays, pre-Lie, Jacobi".into())
}

fn naturality() -> Outcome {
    let mut elements = 0;
    for (family, top) in [(Family::Bullet, 3), (Family::BulletNabla1, 2)] {
        for d in 1..=top {
            let n = stable_dim(family, d);
            for (k, x) in kernel_basis(family, d).unwrap().iter().enumerate() {
                let out = naturality_check(x, n, 20, 1000 + k as u64).unwrap();
                ensure(out.passed(), format!("{family} d={d} element {k} fails at n={n}"))?;
                elements += 1;
            }
        }
    }
    let o2 = FormalSum::from_graph(&chain_graph(1, 2)).unwrap();
    ensure(!naturality_check(&o2, 2, 20, 7).unwrap().passed(), "O2 passes at n=2")?;
    let nabla = FormalSum::from_graph(&nabla_graph(1, 2)).unwrap();
    ensure(!naturality_check(&nabla, 2, 20, 7).unwrap().passed(), "bare ∇ passes at n=2")?;
    Ok(format!("{elements} kernel elements natural; O2 and ∇ rejected"))
}

fn stability_boundary() -> Outcome {
    let g1 = FormalSum::from_graph(&chain_graph(1, 2)).unwrap();
    let g2 = FormalSum::from_graph(&common::times_divergence()).unwrap();
    for trial in 0..20 {
        let data = random_data_for(&g1, 1, &mut trial_rng(5, trial));
        ensure(realize(&g1, &data).unwrap() == realize(&g2, &data).unwrap(), "G1 ≠ G2 at n=1")?;
    }
    let differs = (0..20).any(|trial| {
        let data = random_data_for(&g1, 2, &mut trial_rng(5, trial));
        realize(&g1, &data).unwrap() != realize(&g2, &data).unwrap()
    });
    ensure(differs, "G1 = G2 at n=2 on all trials")?;
    Ok("equal at n=1, distinct at n=2".into())
}

fn trace() -> Outcome {
    let mut graphs = 0;
    for d in 1..=2 {
        for class in &enumerate_basis(Family::BulletNablaTrace, d, 0).graphs {
            let x = FormalSum::from_graph(class.graph()).unwrap();
            let left = trace_sum(&differential_unchecked(&x).unwrap()).unwrap();
            let right = differential_unchecked(&trace_sum(&x).unwrap()).unwrap();
            ensure(left == right, format!("Tr∘δ ≠ δ∘Tr on {}", class.key()))?;
            graphs += 1;
        }
        let images: Vec<FormalSum> =
            kernel_basis(Family::BulletNablaTrace, d).unwrap().iter().map(|k| trace_sum(k).unwrap()).collect();
        for k in kernel_basis(Family::BulletNablaWheel, d).unwrap() {
            ensure(in_span(&k, &images), format!("H0(bullet-nabla-wheel, {d}) not in the image"))?;
        }
    }
    Ok(format!("chain map on {graphs} graphs, H0 image spans for d = 1, 2"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Lie dimensions", lie_dimensions),
        ("worked example", worked_example),
        ("connection dimensions", connection_dimensions),
        ("wheel acyclicity", wheel_acyclicity),
        ("cochain property", cochain_property),
        ("rule regression", rule_regression),
        ("generating functions", generating_functions),
        ("operad laws", operad_laws),
        ("naturality oracle", naturality),
        ("stability boundary", stability_boundary),
        ("trace", trace),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.1}s)", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
