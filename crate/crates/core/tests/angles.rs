use cstar::angles::{angle_suite, pq_suite, square_kind, Quadruple};
use cstar::biproj::Intermediate;
use cstar::fourier::Fourier;
use cstar::models::lookup;
use cstar::report::Status;
use cstar::suites::Context;
use std::f64::consts::FRAC_PI_2;

fn ctx(id: &str) -> Context {
    Context::new(&lookup(id).unwrap(), 1).unwrap()
}

/// Subgroup algebras of the model as (member indices, intermediate).
fn subgroups(c: &Context, tw: &cstar::tower::Tower) -> Vec<(Vec<usize>, Intermediate)> {
    let g = c.model.group.as_ref().unwrap();
    g.subgroups()
        .into_iter()
        .filter(|k| k.len() > 1 && k.len() < g.order())
        .map(|k| {
            let ic = Intermediate::new(tw, "K", &g.algebra(&k)).unwrap();
            (k, ic)
        })
        .collect()
}

fn meet(a: &[usize], b: &[usize]) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

#[test]
fn interior_angle_matches_group_formula() {
    // e_C e_D = e_{C∩D}, so Ẽ((e_C − e₁)*(e_D − e₁)) = (|C∩D| − 1)/|G| and
    // cos α = (|C∩D| − 1) / √((|C| − 1)(|D| − 1))
    for id in ["s3", "z6"] {
        let c = ctx(id);
        let tw = c.tower(2).unwrap();
        let subs = subgroups(&c, &tw);
        for (kc, ic) in &subs {
            for (kd, id_) in &subs {
                let q = Quadruple::new(&tw, ic, id_);
                let want = (meet(kc, kd) as f64 - 1.0) / (((kc.len() - 1) * (kd.len() - 1)) as f64).sqrt();
                let got = q.interior().unwrap().cos;
                assert!((got - want).abs() < 1e-9, "{id} {kc:?} {kd:?}: {got} vs {want}");
                // t = [A:B]₀ tr(e_C e_D) = |C∩D|
                assert!((q.t() - meet(kc, kd) as f64).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn s3_transpositions_are_orthogonal() {
    let c = ctx("s3");
    let tw = c.tower(2).unwrap();
    let ics: Vec<Intermediate> = c.model.intermediates.iter().map(|n| Intermediate::new(&tw, &n.label, &n.alg).unwrap()).collect();
    let q = Quadruple::new(&tw, &ics[0], &ics[1]);
    let a = q.interior().unwrap();
    assert!((a.angle - FRAC_PI_2).abs() < 1e-7);
    assert!((q.t() - 1.0).abs() < 1e-9);
    // C∩D = {e} gives a commuting square, CD ≠ S₃ rules out co-commuting
    let (primal, dual) = q.commuting_residuals();
    assert!(primal < 1e-9);
    assert!(dual.unwrap() > 1e-3);
    assert_eq!(square_kind(primal, dual), "commuting");
}

#[test]
fn z4_equal_subgroups() {
    let c = ctx("z4");
    let tw = c.tower(2).unwrap();
    let ics: Vec<Intermediate> = c.model.intermediates.iter().map(|n| Intermediate::new(&tw, &n.label, &n.alg).unwrap()).collect();
    let q = Quadruple::new(&tw, &ics[0], &ics[1]);
    assert!((q.t() - 2.0).abs() < 1e-9);
    assert!((q.interior().unwrap().cos - 1.0).abs() < 1e-9);
}

#[test]
fn complementary_subgroups_of_z6() {
    // ⟨3⟩ ∩ ⟨2⟩ = {0} and ⟨3⟩ + ⟨2⟩ = ℤ₆
    let c = ctx("z6");
    let tw = c.tower(2).unwrap();
    let ics: Vec<Intermediate> = c.model.intermediates.iter().map(|n| Intermediate::new(&tw, &n.label, &n.alg).unwrap()).collect();
    let q = Quadruple::new(&tw, &ics[0], &ics[1]);
    let (primal, dual) = q.commuting_residuals();
    assert!(primal < 1e-9 && dual.unwrap() < 1e-9);
    assert_eq!(square_kind(primal, dual), "both");
    assert!((q.interior().unwrap().angle - FRAC_PI_2).abs() < 1e-7);
    assert!((q.exterior().unwrap().angle - FRAC_PI_2).abs() < 1e-7);
    assert!(q.alpha_beta_residual().unwrap() < 1e-8);
}

#[test]
fn hadamard_square_commutes() {
    let c = ctx("hadamard");
    let tw = c.tower(2).unwrap();
    let ics: Vec<Intermediate> = c.model.intermediates.iter().map(|n| Intermediate::new(&tw, &n.label, &n.alg).unwrap()).collect();
    let q = Quadruple::new(&tw, &ics[0], &ics[1]);
    let (primal, _) = q.commuting_residuals();
    assert!(primal < 1e-9);
    // E_C E_D = E_B forces tr(e_C e_D) = τ, so the angle is right
    assert!((q.interior().unwrap().angle - FRAC_PI_2).abs() < 1e-7);
    assert!((q.t() - 1.0).abs() < 1e-9);
}

#[test]
fn suites_have_no_failures() {
    for id in ["s3", "z4", "z6", "hadamard"] {
        let c = ctx(id);
        let tw = c.tower(3).unwrap();
        let fr = Fourier::new(&tw);
        let ics: Vec<Intermediate> = c.model.intermediates.iter().map(|n| Intermediate::new(&tw, &n.label, &n.alg).unwrap()).collect();
        let q = Quadruple::new(&tw, &ics[0], &ics[1]);
        for ch in angle_suite(&fr, &q).into_iter().chain(pq_suite(&fr, &q)) {
            assert_ne!(ch.status, Status::Fail, "{id} {}", ch.name);
        }
    }
}
