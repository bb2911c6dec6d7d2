use cstar::expect::{minimal_expectation, watatani_index};
use cstar::models::{build, corpus, lookup};
use cstar::rng::{combination, seeded};
use cstar::tower::{projection_residual, rel, Of, Tower};
use cstar::{CMatrix, Error};
use proptest::prelude::*;

fn tower(id: &str, depth: usize) -> Tower {
    let m = build(&lookup(id).unwrap()).unwrap();
    let (e, _, tr) = minimal_expectation(&m.pair, m.canonical.as_deref(), 1).unwrap();
    Tower::build(&m.pair, &e, &tr, depth).unwrap()
}

#[test]
fn basic_construction_of_z2_is_m2() {
    let tw = tower("z2", 1);
    assert_eq!(tw.level(1).basis.len(), 4);
    assert_eq!(tw.level_algebra(1).block_data().unwrap().dims, vec![2]);
    // e₁ projects onto the span of δ_e
    assert!(projection_residual(tw.e(1)) < 1e-12);
    let rank = tw.e(1).trace().re / tw.level_algebra(1).block_data().unwrap().mults[0] as f64;
    assert!((rank - 1.0).abs() < 1e-9);
}

#[test]
fn basic_construction_of_m2_is_m4() {
    let tw = tower("c_m2", 1);
    // span(A e₁ A) has dimension (dim A)² = 16
    assert_eq!(tw.level(1).basis.len(), 16);
    assert!((tw.tr(tw.e(1)).re - 0.25).abs() < 1e-12);
}

#[test]
fn level_two_of_z3() {
    let tw = tower("z3", 2);
    // ℂ³ ⊂ M₃ has Λ = (1 1 1)ᵀ, so A₂ = M₃ ⊕ M₃ ⊕ M₃
    assert_eq!(tw.level(2).basis.len(), 27);
    assert_eq!(tw.level_algebra(2).block_data().unwrap().dims, vec![3, 3, 3]);
}

#[test]
fn dual_expectation_values() {
    let tw = tower("z2", 1);
    let d = tw.dual_expectation().unwrap();
    let one = CMatrix::identity(tw.ambient());
    assert!(rel(&d.apply(tw.e(1)), &one.scale_re(0.5)) < 1e-10);
    let tw = tower("c_m2", 1);
    let d = tw.dual_expectation().unwrap();
    assert!((d.index_norm() - 4.0).abs() < 1e-9);
    // quasi-basis {2λᵢe₁}
    let qb = tw.dual_quasi_basis();
    let ind = watatani_index(&qb, tw.ambient());
    assert!(rel(&ind, &CMatrix::identity(tw.ambient()).scale_re(4.0)) < 1e-9);
}

#[test]
fn push_down_on_known_elements() {
    let tw = tower("s3", 1);
    let one = CMatrix::identity(tw.ambient());
    assert!(rel(&tw.push_down(tw.e(1)), &one) < 1e-9);
    let mut r = seeded(2);
    let a = combination(&mut r, &tw.level(0).basis);
    let b = combination(&mut r, &tw.level(0).basis);
    assert!(rel(&tw.push_down(&a), &a) < 1e-9);
    // a e₁ b e₁ = a E₀(b) e₁, so a e₁ b pushes down to a E₀(b)
    let x1 = a.matmul(tw.e(1)).matmul(&b);
    let want = a.matmul(&tw.proj(-1, &b));
    assert!(rel(&tw.push_down(&x1), &want) < 1e-9);
}

#[test]
fn commutant_dimensions_of_z2() {
    let tw = tower("z2", 3);
    let dims: Vec<usize> = (0..=3).map(|k| tw.commutant(k, Of::B).len()).collect();
    // B = ℂ, so B′∩A_k = A_k with dim 2^{k+1}
    let oracle: Vec<usize> = (0..=3).map(|k| tw.level(k as isize).basis.len()).collect();
    assert_eq!(dims, oracle);
    assert_eq!(dims, vec![2, 4, 8, 16]);
}

#[test]
fn markov_trace_of_jones_projections() {
    for id in ["z2", "z3", "c_m2", "diag_m2"] {
        let tw = tower(id, 3);
        for j in 1..=3 {
            assert!((tw.tr(tw.e(j)).re - tw.tau).abs() < 1e-10, "{id} e_{j}");
        }
    }
}

#[test]
fn multi_step_projection_trace() {
    let tw = tower("z2", 3);
    let p = tw.multi_step_projection(1).unwrap();
    assert!(projection_residual(&p) < 1e-10);
    assert!((tw.tr(&p).re - 0.25).abs() < 1e-10);
    let tw = tower("z2", 2);
    assert!(matches!(tw.multi_step_projection(1), Err(Error::DepthLimit { .. })));
}

#[test]
fn composed_quasi_basis_sizes() {
    for (id, want) in [("z2", 4usize), ("z3", 9)] {
        let tw = tower(id, 1);
        let qb = tw.composed_quasi_basis(1).unwrap();
        assert_eq!(qb.len(), want, "{id}");
        let ind = watatani_index(&qb, tw.ambient());
        assert!(rel(&ind, &CMatrix::identity(tw.ambient()).scale_re(want as f64)) < 1e-9, "{id}");
        let tests: Vec<CMatrix> = tw.level(1).basis.clone();
        assert!(tw.quasi_basis_residual(-1, &qb, &tests) < 1e-9);
    }
}

#[test]
fn commutant_expectation_of_e1() {
    let tw = tower("s3", 2);
    let one = CMatrix::identity(tw.ambient());
    assert!(rel(&tw.commutant_expectation(tw.e(1)), &one.scale_re(tw.tau)) < 1e-9);
    // random x against the trace-orthogonal projection onto A′∩A₂
    let mut r = seeded(6);
    let x = combination(&mut r, tw.commutant(2, Of::B));
    let y = tw.commutant_expectation(&x);
    let z = cstar::numkernel::project(tw.commutant(2, Of::A), tw.ip(), &x);
    assert!(rel(&y, &z) < 1e-9);
}

#[test]
fn depth_limit() {
    let m = build(&lookup("z2").unwrap()).unwrap();
    let (e, _, tr) = minimal_expectation(&m.pair, None, 1).unwrap();
    assert!(matches!(Tower::build(&m.pair, &e, &tr, 9), Err(Error::DepthLimit { requested: 9, .. })));
    let tw = Tower::build(&m.pair, &e, &tr, 0).unwrap();
    assert_eq!(tw.depth, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn jones_relations(idx in 0usize..10, seed in any::<u64>()) {
        let spec = &corpus()[idx];
        let m = build(spec).unwrap();
        let (e, _, tr) = minimal_expectation(&m.pair, m.canonical.as_deref(), 1).unwrap();
        let depth = m.depth.min(2);
        let tw = Tower::build(&m.pair, &e, &tr, depth).unwrap();
        let tau = tw.tau;
        for j in 1..=depth {
            prop_assert!(projection_residual(tw.e(j)) < 1e-9);
            if j >= 2 {
                let (a, b) = (tw.e(j), tw.e(j - 1));
                prop_assert!(rel(&a.matmul(b).matmul(a), &a.scale_re(tau)) < 1e-9);
                prop_assert!(rel(&b.matmul(a).matmul(b), &b.scale_re(tau)) < 1e-9);
            }
        }
        // e₁ x e₁ = E₀(x) e₁ and tr(x e₁) = τ tr(x) for random x ∈ A
        let mut r = seeded(seed);
        let x = combination(&mut r, &tw.level(0).basis);
        let e1 = tw.e(1);
        prop_assert!(rel(&e1.matmul(&x).matmul(e1), &tw.proj(-1, &x).matmul(e1)) < 1e-9);
        let d = (tw.tr(&x.matmul(e1)) - tw.tr(&x) * tau).norm();
        prop_assert!(d <= 1e-9 * tw.ip().norm(&x));
    }

    #[test]
    fn trace_is_tracial_on_a1(idx in 0usize..10, seed in any::<u64>()) {
        let m = build(&corpus()[idx]).unwrap();
        let (e, _, tr) = minimal_expectation(&m.pair, m.canonical.as_deref(), 1).unwrap();
        let tw = Tower::build(&m.pair, &e, &tr, 1).unwrap();
        let mut r = seeded(seed);
        let x = combination(&mut r, &tw.level(1).basis);
        let y = combination(&mut r, &tw.level(1).basis);
        let d = (tw.tr(&x.matmul(&y)) - tw.tr(&y.matmul(&x))).norm();
        prop_assert!(d <= 1e-10 * tw.ip().norm(&x) * tw.ip().norm(&y));
        // proj onto A is idempotent and trace preserving
        let p = tw.proj(0, &x);
        prop_assert!(rel(&tw.proj(0, &p), &p) < 1e-10);
        prop_assert!((tw.tr(&p) - tw.tr(&x)).norm() <= 1e-10 * tw.ip().norm(&x));
    }
}
