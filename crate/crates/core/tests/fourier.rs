use cstar::expect::minimal_expectation;
use cstar::fourier::Fourier;
use cstar::models::{build, lookup};
use cstar::rng::{combination, seeded};
use cstar::tower::{rel, Of, Tower};
use cstar::{CMatrix, Error};
use proptest::prelude::*;

fn tower(id: &str, depth: usize) -> Tower {
    let m = build(&lookup(id).unwrap()).unwrap();
    let (e, _, tr) = minimal_expectation(&m.pair, m.canonical.as_deref(), 1).unwrap();
    Tower::build(&m.pair, &e, &tr, depth).unwrap()
}

const IDS: [&str; 4] = ["z2", "z3", "c_m2", "diag_m2"];

#[test]
fn fourier_of_jones_words() {
    // with B′∩A = ℂ: F_k(e₁⋯e_k) = τ^{k/2}
    for id in ["z2", "z3", "c_m2"] {
        let tw = tower(id, 3);
        let fr = Fourier::new(&tw);
        let one = CMatrix::identity(tw.ambient());
        for k in 1..=2 {
            let y = fr.fourier(k, &tw.e_run(1, k)).unwrap();
            assert!(rel(&y, &one.scale_re(tw.tau.powf(k as f64 / 2.0))) < 1e-9, "{id} k={k}");
            let y = fr.fourier(k, &fr.coproduct_identity(k)).unwrap();
            assert!(rel(&y, &one) < 1e-9, "{id} k={k}");
        }
    }
}

#[test]
fn fourier_of_unit_on_abelian_algebra() {
    // ℂ ⊂ ℂ³: A′∩A₁ is the diagonal masa of M₃ and e₁ is the all-1/3 matrix, whose diagonal
    // part is τ·1. So F₀(1) = τ⁻¹ E_{A′∩A₁}(e₁) = 1.
    let tw = tower("z3", 2);
    let fr = Fourier::new(&tw);
    let one = CMatrix::identity(tw.ambient());
    let y = fr.fourier(0, &one).unwrap();
    assert!(rel(&y, &one) < 1e-9);
    assert_eq!(tw.commutant(1, Of::A).len(), 3);
}

#[test]
fn projection_route_agrees() {
    for id in IDS {
        let tw = tower(id, 3);
        let fr = Fourier::new(&tw);
        let mut r = seeded(11);
        for k in 0..=2 {
            let x = combination(&mut r, tw.commutant(k, Of::B));
            let a = fr.fourier(k, &x).unwrap();
            let b = fr.fourier_by_projection(k, &x).unwrap();
            assert!(rel(&a, &b) < 1e-9, "{id} k={k}");
        }
    }
}

#[test]
fn rotation_routes_agree() {
    for id in IDS {
        let tw = tower(id, 3);
        let fr = Fourier::new(&tw);
        let mut r = seeded(12);
        for k in 1..=2 {
            let x = combination(&mut r, tw.commutant(k, Of::B));
            let a = fr.rotation(k, &x).unwrap();
            let b = fr.rotation_by_basis(k, &x).unwrap();
            assert!(rel(&a, &b) < 1e-9, "{id} k={k}");
        }
    }
}

#[test]
fn gamma0_fixes_e1_and_reverses_products() {
    for id in IDS {
        let tw = tower(id, 2);
        let fr = Fourier::new(&tw);
        assert!(rel(&fr.gamma0(tw.e(1)).unwrap(), tw.e(1)) < 1e-9, "{id}");
        let mut r = seeded(13);
        let x = combination(&mut r, tw.commutant(1, Of::B));
        let y = combination(&mut r, tw.commutant(1, Of::B));
        let lhs = fr.gamma0(&x.matmul(&y)).unwrap();
        let rhs = fr.gamma0(&y).unwrap().matmul(&fr.gamma0(&x).unwrap());
        assert!(rel(&lhs, &rhs) < 1e-9, "{id}");
        assert!(rel(&fr.gamma0(&fr.gamma0(&x).unwrap()).unwrap(), &x) < 1e-9, "{id}");
        // γ₀ is a *-map
        assert!(rel(&fr.gamma0(&x.adjoint()).unwrap(), &fr.gamma0(&x).unwrap().adjoint()) < 1e-9, "{id}");
    }
}

#[test]
fn gamma1_is_an_involution_and_shift_inverts() {
    for id in ["z2", "c_m2"] {
        let tw = tower(id, 3);
        let fr = Fourier::new(&tw);
        let mut r = seeded(14);
        let y = combination(&mut r, tw.commutant(3, Of::B));
        assert!(rel(&fr.gamma1(&fr.gamma1(&y).unwrap()).unwrap(), &y) < 1e-9, "{id}");
        let x = combination(&mut r, tw.commutant(1, Of::B));
        let s = fr.shift(&x).unwrap();
        // the shift lands in A₁′∩A₃
        for a in &tw.level(1).basis {
            assert!(s.commutator(a).fro_norm() < 1e-9 * s.fro_norm() * a.fro_norm(), "{id}");
        }
        assert!(rel(&fr.shift_inv(&s).unwrap(), &x) < 1e-9, "{id}");
        // shift is multiplicative
        let z = combination(&mut r, tw.commutant(1, Of::B));
        let lhs = fr.shift(&x.matmul(&z)).unwrap();
        let rhs = fr.shift(&x).unwrap().matmul(&fr.shift(&z).unwrap());
        assert!(rel(&lhs, &rhs) < 1e-9, "{id}");
    }
}

#[test]
fn coproduct_unit_and_associativity() {
    for id in IDS {
        let tw = tower(id, 3);
        let fr = Fourier::new(&tw);
        let mut r = seeded(15);
        for k in 0..=1 {
            let basis = tw.commutant(k, Of::B);
            let (x, y, z) = (combination(&mut r, basis), combination(&mut r, basis), combination(&mut r, basis));
            let i = fr.coproduct_identity(k);
            assert!(rel(&fr.coproduct(k, &x, &i).unwrap(), &x) < 1e-9, "{id} k={k}");
            assert!(rel(&fr.coproduct(k, &i, &x).unwrap(), &x) < 1e-9, "{id} k={k}");
            let lhs = fr.coproduct(k, &fr.coproduct(k, &x, &y).unwrap(), &z).unwrap();
            let rhs = fr.coproduct(k, &x, &fr.coproduct(k, &y, &z).unwrap()).unwrap();
            assert!(rel(&lhs, &rhs) < 1e-9, "{id} k={k}");
        }
    }
}

#[test]
fn adjoint_rule() {
    for id in IDS {
        let tw = tower(id, 3);
        let fr = Fourier::new(&tw);
        let mut r = seeded(16);
        for k in 1..=2 {
            let x = combination(&mut r, tw.commutant(k, Of::B));
            assert!(fr.adjoint_rule_defect(k, &x).unwrap() < 1e-9, "{id} k={k}");
        }
    }
}

#[test]
fn input_outside_commutant_is_rejected() {
    let tw = tower("s3_h", 2);
    let fr = Fourier::new(&tw);
    // an element of A that does not commute with the transposition
    let x = tw
        .level(0)
        .basis
        .iter()
        .find(|x| tw.commutant_residual(0, Of::B, x) > 1e-3)
        .unwrap()
        .clone();
    assert!(matches!(fr.fourier(0, &x), Err(Error::NotInCommutant(_))));
    assert!(matches!(fr.fourier(2, &CMatrix::identity(tw.ambient())), Err(Error::DepthLimit { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn inverse_and_isometry(idx in 0usize..4, k in 0usize..3, seed in any::<u64>()) {
        let tw = tower(IDS[idx], 3);
        let fr = Fourier::new(&tw);
        let mut r = seeded(seed);
        let x = combination(&mut r, tw.commutant(k, Of::B));
        let y = fr.fourier(k, &x).unwrap();
        prop_assert!(tw.commutant_residual(k + 1, Of::A, &y) < 1e-9);
        prop_assert!(rel(&fr.fourier_inv(k, &y).unwrap(), &x) < 1e-9);
        prop_assert!(fr.isometry_defect(k, &x).unwrap() < 1e-9);
        // surjective: a random y ∈ A′∩A_{k+1} comes back
        let z = combination(&mut r, tw.commutant(k + 1, Of::A));
        prop_assert!(rel(&fr.fourier(k, &fr.fourier_inv(k, &z).unwrap()).unwrap(), &z) < 1e-9);
    }
}
