//! Acceptance criteria 1-10. One line per criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use cstar::biproj::{classify, BiKind, Intermediate};
use cstar::expect::{in_index_set, index_second_basis, minimal_expectation, minimality_check, state_expectation};
use cstar::fourier::Fourier;
use cstar::lattice::{bound_check, enumerate, hasse_dot, minimal_angles};
use cstar::models::{build, corpus, lookup, ModelSpec};
use cstar::suites::{angles_suite, biproj_suite, fourier_suite, tower_suite, Context, ANALYSIS_DEPTH};
use cstar::{Check, CMatrix, InclusionPair, Status};

const SEED: u64 = 0xC57A;
const QB_TOL: f64 = 1e-8;
const INDEX_TOL: f64 = 1e-6;
const CERT_TOL: f64 = 1e-8;
const TOWER_TOL: f64 = 1e-8;
const FOURIER_TOL: f64 = 1e-8;
const T_TOL: f64 = 1e-6;
const ANGLE_TOL: f64 = 1e-7;
const SQUARE_TOL: f64 = 1e-8;

type Outcome = Result<String, String>;

fn ctx(spec: &ModelSpec) -> Result<Context, String> {
    Context::new(spec, SEED).map_err(|e| format!("{}: {e}", spec.label))
}

fn find<'a>(checks: &'a [Check], name: &str) -> Option<&'a Check> {
    checks.iter().find(|c| c.name == name)
}

/// Named checks must be present and pass; nothing in the list may fail.
fn require(model: &str, checks: &[Check], names: &[&str]) -> Result<(), String> {
    for n in names {
        match find(checks, n) {
            Some(c) if c.status == Status::Pass => {}
            Some(c) => return Err(format!("{model}: {n} is {} (residual {:?})", c.status.as_str(), c.residual)),
            None => return Err(format!("{model}: {n} missing")),
        }
    }
    if let Some(c) = checks.iter().find(|c| c.is_fail()) {
        return Err(format!("{model}: {} fails (residual {:?})", c.name, c.residual));
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for spec in corpus() {
        let c = ctx(&spec)?;
        let mut exps = vec![c.e0.clone()];
        // expectations onto and from every intermediate
        for nm in c.intermediates() {
            let ac = InclusionPair::new(c.model.pair.big.clone(), nm.alg.clone()).map_err(|e| e.to_string())?;
            let cb = InclusionPair::new(nm.alg.clone(), c.model.pair.small.clone()).map_err(|e| e.to_string())?;
            for p in [ac, cb] {
                exps.push(minimal_expectation(&p, None, SEED).map_err(|e| e.to_string())?.0);
            }
        }
        for e in &exps {
            let r = e.quasi_basis_residual(&e.quasi_basis);
            let (_, d) = index_second_basis(e, SEED).map_err(|e| e.to_string())?;
            worst = worst.max(r).max(d);
            count += 1;
        }
    }
    if worst <= QB_TOL {
        Ok(format!("{count} expectations, worst residual {worst:.2e} ≤ {QB_TOL:e}"))
    } else {
        Err(format!("worst residual {worst:.2e} > {QB_TOL:e}"))
    }
}

fn criterion_2() -> Outcome {
    let mut n = 0;
    for spec in corpus() {
        let c = ctx(&spec)?;
        let ind = c.e0.index_norm();
        if let Some(g) = &c.model.group {
            let want = g.order() as f64 / g.subgroup.len() as f64;
            if (ind - want).abs() > INDEX_TOL {
                return Err(format!("{}: index {ind} vs [G:H] = {want}", spec.label));
            }
        }
        let fixed = match spec.label.as_str() {
            "diag_m2" => Some(2.0),
            "c_m2" => Some(4.0),
            _ => None,
        };
        if let Some(want) = fixed {
            if (ind - want).abs() > INDEX_TOL {
                return Err(format!("{}: index {ind} vs {want}", spec.label));
            }
        }
        if c.e0.is_scalar_index() && !in_index_set(ind, INDEX_TOL) && (ind - 1.0).abs() > INDEX_TOL {
            return Err(format!("{}: scalar index {ind} outside the allowed set", spec.label));
        }
        n += 1;
    }
    Ok(format!("{n} models, group indices equal [G:H], Δ₂⊂M₂ = 2, ℂ⊂M₂ = 4, scalar indices in the allowed set"))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for spec in corpus() {
        let c = ctx(&spec)?;
        if !c.cert.minimal {
            return Err(format!("{}: no certified minimal expectation", spec.label));
        }
        let r = c.cert.residual.max(c.cert.scalar_form_residual.unwrap_or(0.0));
        worst = worst.max(r);
    }
    if worst > CERT_TOL {
        return Err(format!("certificate residual {worst:.2e} > {CERT_TOL:e}"));
    }
    // ℂ ⊂ M₂ with a non-tracial faithful state
    let m = build(&lookup("c_m2").unwrap()).map_err(|e| e.to_string())?;
    let mut sigma = CMatrix::zeros(2, 2);
    sigma[(0, 0)] = 0.7.into();
    sigma[(1, 1)] = 0.3.into();
    let es = state_expectation(&m.pair.big, &sigma).map_err(|e| e.to_string())?;
    let cert = minimality_check(&es).map_err(|e| e.to_string())?;
    if cert.minimal {
        return Err("non-tracial ℂ⊂M₂ expectation was certified minimal".into());
    }
    Ok(format!("worst certificate residual {worst:.2e}; non-tracial ℂ⊂M₂ rejected"))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut triples = 0;
    let mut skipped = 0;
    for spec in corpus() {
        let c = ctx(&spec)?;
        let iab = c.e0.index_norm();
        for nm in c.intermediates() {
            let ac = InclusionPair::new(c.model.pair.big.clone(), nm.alg.clone()).map_err(|e| e.to_string())?;
            let cb = InclusionPair::new(nm.alg.clone(), c.model.pair.small.clone()).map_err(|e| e.to_string())?;
            let eac = minimal_expectation(&ac, None, SEED).map_err(|e| e.to_string())?.0;
            let ecb = minimal_expectation(&cb, None, SEED).map_err(|e| e.to_string())?.0;
            if !(eac.is_scalar_index() && ecb.is_scalar_index()) {
                skipped += 1;
                continue;
            }
            worst = worst.max((iab - eac.index_norm() * ecb.index_norm()).abs());
            triples += 1;
        }
    }
    if triples == 0 {
        return Err("no nested triple in the corpus".into());
    }
    if worst <= INDEX_TOL {
        Ok(format!("{triples} triples ({skipped} with non-scalar legs skipped), worst {worst:.2e}"))
    } else {
        Err(format!("worst defect {worst:.2e} > {INDEX_TOL:e}"))
    }
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for (id, depth) in [("z2", 3), ("z3", 3), ("s3", 2), ("m2_m4", 2)] {
        let c = ctx(&lookup(id).unwrap())?;
        let checks = tower_suite(&c, depth).map_err(|e| e.to_string())?;
        let mut names = vec!["e_projection", "e_implements", "markov", "temperley_lieb"];
        if depth >= 3 {
            names.push("e_far_commute");
        }
        let dims: Vec<String> = (0..=depth).map(|k| format!("commutant_dim[{k}]")).collect();
        names.extend(dims.iter().map(String::as_str));
        require(id, &checks, &names)?;
        for n in &names[..4] {
            worst = worst.max(find(&checks, n).and_then(|c| c.residual).unwrap_or(0.0));
        }
        if worst > TOWER_TOL {
            return Err(format!("{id}: residual {worst:.2e} > {TOWER_TOL:e}"));
        }
    }
    Ok(format!("ℤ₂, ℤ₃ at depth 3; S₃, M₂⊂M₄ at depth 2; worst residual {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let names = [
        "fourier_inverse[1]",
        "fourier_inverse_right[1]",
        "fourier_inverse[2]",
        "fourier_inverse_right[2]",
        "fourier_isometry",
        "gamma0_involution",
        "gamma0_anti_multiplicative",
        "gamma0_star",
        "rho3_square_root",
        "shift_lands",
        "shift_multiplicative",
        "shift_star",
        "shift_inverse",
        "shift_inverse_right",
        "coproduct_associative[1]",
        "coproduct_identity[1]",
        "coproduct_associative[2]",
        "coproduct_identity[2]",
    ];
    let mut worst: f64 = 0.0;
    let mut models = 0;
    for spec in corpus() {
        let c = ctx(&spec)?;
        let tw = c.tower(ANALYSIS_DEPTH).map_err(|e| e.to_string())?;
        let checks = fourier_suite(&c, &tw);
        require(&spec.label, &checks, &names)?;
        for n in &names[..5] {
            worst = worst.max(find(&checks, n).and_then(|c| c.residual).unwrap_or(0.0));
        }
        models += 1;
    }
    if worst > FOURIER_TOL {
        return Err(format!("Fourier residual {worst:.2e} > {FOURIER_TOL:e}"));
    }
    Ok(format!("{models} models, {} identities each, worst inverse/isometry residual {worst:.2e}", names.len()))
}

fn criterion_7() -> Outcome {
    let mut worst_t: f64 = 0.0;
    let mut hnm = 0;
    let mut classified = 0;
    for spec in corpus() {
        let c = ctx(&spec)?;
        let tw = c.tower(ANALYSIS_DEPTH).map_err(|e| e.to_string())?;
        let checks = biproj_suite(&c, &tw).map_err(|e| e.to_string())?;
        require(&spec.label, &checks, &["fourier_e1"])?;
        hnm += checks.iter().filter(|c| c.status == Status::HypothesisNotMet).count();
        let fr = Fourier::new(&tw);
        let mut all = c.intermediates();
        all.push(cstar::models::Named { label: "B".into(), alg: c.model.pair.small.clone() });
        all.push(cstar::models::Named { label: "A".into(), alg: c.model.pair.big.clone() });
        for nm in all {
            let it = Intermediate::new(&tw, &nm.label, &nm.alg).map_err(|e| e.to_string())?;
            let be = classify(&fr, 1, &it.e).map_err(|e| e.to_string())?;
            if be.kind != BiKind::Biprojection {
                return Err(format!("{}: e_{} not classified as a biprojection", spec.label, nm.label));
            }
            let want = tw.index.sqrt() / it.index_ac.0;
            let got = be.t.unwrap_or(f64::NAN);
            let d = (got - want).abs();
            if !(d <= T_TOL) {
                return Err(format!("{}: t(e_{}) = {got} vs {want}", spec.label, nm.label));
            }
            worst_t = worst_t.max(d);
            classified += 1;
        }
    }
    Ok(format!("{classified} e_C classified, worst t defect {worst_t:.2e}, 0 fail, {hnm} hypothesis_not_met"))
}

fn angle_checks(id: &str) -> Result<Vec<Check>, String> {
    let c = ctx(&lookup(id).unwrap())?;
    let tw = c.tower(ANALYSIS_DEPTH).map_err(|e| e.to_string())?;
    angles_suite(&c, &tw).map_err(|e| e.to_string())
}

fn criterion_8() -> Outcome {
    let s3 = angle_checks("s3_quadruple")?;
    let alpha = find(&s3, "alpha[C|D]").and_then(|c| c.value).ok_or("s3_quadruple: no α record")?;
    if (alpha - PI / 2.0).abs() > ANGLE_TOL {
        return Err(format!("S₃ α = {alpha}, expected π/2"));
    }
    let had = angle_checks("hadamard")?;
    let tag = "diag|hadamard_diag";
    let a = find(&had, &format!("alpha[{tag}]")).and_then(|c| c.value).ok_or("hadamard: no α record")?;
    let sq = find(&had, &format!("square_kind[{tag}]")).and_then(|c| c.residual).ok_or("hadamard: no square residual")?;
    let commuting = sq <= SQUARE_TOL;
    let right = (a - PI / 2.0).abs() <= SQUARE_TOL;
    if commuting != right {
        return Err(format!("hadamard: commuting residual {sq:.2e} but α = {a}"));
    }
    let mut worst: f64 = 0.0;
    let mut flagged = 0;
    for spec in corpus() {
        if lookup(&spec.label).map(|s| build(&s).map(|m| m.quadruples.is_empty()).unwrap_or(true)).unwrap_or(true) {
            continue;
        }
        let checks = angle_checks(&spec.label)?;
        for c in &checks {
            let rel = c.name.starts_with("alpha_beta_relation") || c.name.starts_with("duality");
            if !rel {
                continue;
            }
            match c.status {
                Status::Pass => worst = worst.max(c.residual.unwrap_or(0.0)),
                Status::Fail => return Err(format!("{}: {} residual {:?}", spec.label, c.name, c.residual)),
                _ => flagged += 1,
            }
        }
        if let Some(c) = checks.iter().find(|c| c.is_fail()) {
            return Err(format!("{}: {} fails", spec.label, c.name));
        }
    }
    Ok(format!("S₃ α = {alpha:.9}; Hadamard commuting ⇔ right angle ({sq:.1e}); α-β and duality worst {worst:.2e}, {flagged} flagged"))
}

fn criterion_9() -> Outcome {
    let names = ["gamma0_p", "p_squared", "t_norm", "tr_p", "support_p"];
    let mut worst: f64 = 0.0;
    let mut quads = 0;
    let mut flagged = 0;
    for spec in corpus() {
        let m = build(&spec).map_err(|e| e.to_string())?;
        if m.quadruples.is_empty() {
            continue;
        }
        let checks = angle_checks(&spec.label)?;
        for &(i, j) in &m.quadruples {
            let tag = format!("{}|{}", m.intermediates[i].label, m.intermediates[j].label);
            for n in names {
                let name = format!("{n}[{tag}]");
                let c = find(&checks, &name).ok_or_else(|| format!("{}: {name} missing", spec.label))?;
                match c.status {
                    Status::Pass => worst = worst.max(c.residual.unwrap_or(0.0)),
                    Status::HypothesisNotMet => flagged += 1,
                    s => return Err(format!("{}: {name} is {} (residual {:?})", spec.label, s.as_str(), c.residual)),
                }
            }
            quads += 1;
        }
    }
    if worst > ANGLE_TOL {
        return Err(format!("p/q residual {worst:.2e} > {ANGLE_TOL:e}"));
    }
    Ok(format!("{quads} quadruples, worst residual {worst:.2e}, {flagged} flagged"))
}

/// Bell numbers by the triangle recurrence.
fn bell(n: usize) -> usize {
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0]
}

fn criterion_10() -> Outcome {
    let mut min_angle = f64::INFINITY;
    let mut pairs = 0;
    for id in ["s3", "z6"] {
        let m = build(&lookup(id).unwrap()).map_err(|e| e.to_string())?;
        let lat = enumerate(&m, SEED).map_err(|e| e.to_string())?;
        let nodes = lat.group_minimal();
        for (a, b, ang) in minimal_angles(&m, &lat, &nodes, SEED).map_err(|e| e.to_string())? {
            if !(ang > PI / 3.0) {
                return Err(format!("{id}: α({a},{b}) = {ang} ≤ π/3"));
            }
            min_angle = min_angle.min(ang);
            pairs += 1;
        }
    }
    let m = build(&lookup("z4").unwrap()).map_err(|e| e.to_string())?;
    let lat = enumerate(&m, SEED).map_err(|e| e.to_string())?;
    if lat.len() != bell(4) {
        return Err(format!("ℂ⊂ℂ[ℤ₄]: {} nodes, Bell(4) = {}", lat.len(), bell(4)));
    }
    let bounds = bound_check(&lat, SEED);
    require("z4", &bounds, &["node_bound", "minimal_bound"])?;
    let again = enumerate(&m, SEED).map_err(|e| e.to_string())?;
    if hasse_dot(&lat) != hasse_dot(&again) {
        return Err("DOT output differs between runs".into());
    }
    Ok(format!("{pairs} minimal pairs, smallest angle {min_angle:.4} > π/3; ℤ₄ lattice has 15 nodes, bounds hold, DOT stable"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("quasi-basis law", criterion_1),
        ("index values", criterion_2),
        ("minimality certificate", criterion_3),
        ("multiplicativity", criterion_4),
        ("tower laws", criterion_5),
        ("fourier suite", criterion_6),
        ("biprojection suite", criterion_7),
        ("angle suite", criterion_8),
        ("p/q suite", criterion_9),
        ("rigidity and bounds", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("criterion {:>2} PASS {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
