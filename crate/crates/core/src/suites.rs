//! Invariant suites. Each runs over one model and returns a report of named checks.

use std::str::FromStr;

use crate::angles::{angle_suite, commuting_square_check, pq_suite, Quadruple};
use crate::biproj::{classify, e1_commutant_is_b, exchange_check, intermediate_basis_identity, intermediate_from_biprojection, irreducible, jones_relations, scalar_relations, BiKind, Intermediate};
use crate::expect::{
    h_map, in_index_set, index_central_residual, index_second_basis, minimal_expectation, minimality_check, pp_constant, state_expectation, tp_expectation, CondExp,
    MinimalityCertificate, TraceState,
};
use crate::fourier::Fourier;
use crate::lattice::{self, kk_distance, Lattice};
use crate::models::{build, Model, ModelSpec, Named};
use crate::numkernel::{herm_eig, orthonormalize, project, CMatrix};
use crate::report::{Check, Report, Status};
use crate::rng::{combination, hermitian_combination, seeded};
use crate::staralg::{compress_by_projection, relative_commutant, InclusionPair};
use crate::tower::{projection_residual, rel, Of, Tower};
use crate::{tol, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Expect,
    Tower,
    Fourier,
    Biproj,
    Angles,
    Lattice,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Expect, Suite::Tower, Suite::Fourier, Suite::Biproj, Suite::Angles, Suite::Lattice];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Expect => "expect",
            Suite::Tower => "tower",
            Suite::Fourier => "fourier",
            Suite::Biproj => "biproj",
            Suite::Angles => "angles",
            Suite::Lattice => "lattice",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL.iter().copied().find(|x| x.as_str() == s).ok_or_else(|| Error::BadSpec(format!("unknown suite `{s}`")))
    }
}

/// A built model with its certified minimal expectation and Markov trace.
pub struct Context {
    pub model: Model,
    pub e0: CondExp,
    pub cert: MinimalityCertificate,
    pub tr: TraceState,
    pub seed: u64,
}

impl Context {
    pub fn new(spec: &ModelSpec, seed: u64) -> Result<Context> {
        let model = build(spec)?;
        let (e0, cert, tr) = minimal_expectation(&model.pair, model.canonical.as_deref(), seed)?;
        Ok(Context { model, e0, cert, tr, seed })
    }

    pub fn tower(&self, depth: usize) -> Result<Tower> {
        Tower::build(&self.model.pair, &self.e0, &self.tr, depth)
    }

    /// Named intermediates, plus every proper subgroup algebra between H and G.
    pub fn intermediates(&self) -> Vec<Named> {
        let mut out = self.model.intermediates.clone();
        if let Some(g) = &self.model.group {
            let (h, n) = (g.subgroup.len(), g.order());
            for k in g.subgroups() {
                if k.len() == h || k.len() == n || !g.subgroup.iter().all(|x| k.contains(x)) {
                    continue;
                }
                let alg = g.algebra(&k);
                if out.iter().any(|x| x.alg.subspace_distance(&alg) < 1e-6) {
                    continue;
                }
                let label = format!("K{{{}}}", k.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","));
                out.push(Named { label, alg });
            }
        }
        out
    }
}

/// Depth used by the fourier, biproj and angles suites.
pub const ANALYSIS_DEPTH: usize = 3;

pub fn run(suite: Suite, spec: &ModelSpec, seed: u64) -> Result<Report> {
    let ctx = Context::new(spec, seed)?;
    let mut rep = Report::new(&ctx.model.id, suite.as_str(), seed);
    match suite {
        Suite::Expect => rep.checks = expect_suite(&ctx)?,
        Suite::Tower => rep.checks = tower_suite(&ctx, ctx.model.depth)?,
        Suite::Fourier => rep.checks = fourier_suite(&ctx, &ctx.tower(ANALYSIS_DEPTH)?),
        Suite::Biproj => rep.checks = biproj_suite(&ctx, &ctx.tower(ANALYSIS_DEPTH)?)?,
        Suite::Angles => {
            let tw = ctx.tower(ANALYSIS_DEPTH)?;
            rep.checks = angles_suite(&ctx, &tw)?;
            if ctx.model.quadruples.is_empty() {
                rep.warnings.push("model defines no quadruple".into());
            }
        }
        Suite::Lattice => {
            let (checks, lat) = lattice_suite(&ctx, tol::NODE_CAP)?;
            rep.checks = checks;
            rep.warnings.extend(lat.warnings);
        }
    }
    Ok(rep)
}

/// Expectation and tower invariants with the tower built to `depth`.
pub fn tower_report(spec: &ModelSpec, depth: usize, seed: u64) -> Result<Report> {
    if depth > tol::MAX_DEPTH {
        return Err(Error::DepthLimit { requested: depth, limit: tol::MAX_DEPTH });
    }
    let ctx = Context::new(spec, seed)?;
    let mut rep = Report::new(&ctx.model.id, "tower", seed);
    rep.checks = expect_suite(&ctx)?;
    rep.checks.extend(tower_suite(&ctx, depth)?);
    Ok(rep)
}

/// Lattice report plus the lattice itself, for diagram output.
pub fn lattice_report(spec: &ModelSpec, seed: u64, cap: usize) -> Result<(Report, Lattice)> {
    let ctx = Context::new(spec, seed)?;
    let mut rep = Report::new(&ctx.model.id, "lattice", seed);
    let (checks, lat) = lattice_suite(&ctx, cap)?;
    rep.checks = checks;
    rep.warnings.extend(lat.warnings.iter().cloned());
    Ok((rep, lat))
}

fn prefixed(checks: Vec<Check>, tag: &str) -> Vec<Check> {
    checks
        .into_iter()
        .map(|c| {
            let name = format!("{}[{}]", c.name, tag);
            c.renamed(name)
        })
        .collect()
}

fn err_check(name: &str, statement: &str, e: Error) -> Check {
    match e {
        Error::DepthLimit { .. } => Check::undefined(name, &format!("{statement} (tower too shallow)")),
        e => Check::with_status(name, &format!("{statement}: {e}"), Status::Fail, None, 0.0),
    }
}

fn residual_check(name: &str, statement: &str, r: Result<f64>, tolerance: f64) -> Check {
    match r {
        Ok(v) => Check::identity(name, statement, v, tolerance),
        Err(e) => err_check(name, statement, e),
    }
}

// ---------------------------------------------------------------- expect

/// Quasi-basis law, index, minimality, Pimsner–Popa bound, positivity, intermediates.
pub fn expect_suite(ctx: &Context) -> Result<Vec<Check>> {
    let e = &ctx.e0;
    let pair = &ctx.model.pair;
    let n = e.ambient();
    let seed = ctx.seed;
    let mut out = Vec::new();
    out.push(Check::identity("quasi_basis", "Σ λ E(λ* x) = x = Σ E(x λ) λ*", e.quasi_basis_residual(&e.quasi_basis), tol::QUASI_BASIS));
    let (_, diff) = index_second_basis(e, seed)?;
    out.push(Check::identity("index_second_basis", "Ind(E) does not depend on the quasi-basis", diff, tol::QUASI_BASIS));
    out.push(Check::identity("index_central", "Ind(E) is central in A", index_central_residual(e), 1e-9));
    out.push(Check::identity("expectation_laws", "E(1) = 1 and E(b x b′) = b E(x) b′", e.expectation_residual(), 1e-9));
    let (pos, ks) = e.positivity_defects(seed, 64);
    out.push(Check::identity("positivity", "E(x*x) ≥ 0", pos, 1e-8));
    out.push(Check::identity("kadison_schwarz", "E(x)*E(x) ≤ E(x*x)", ks, 1e-8));
    let ind = e.index_norm();
    out.push(Check::record("index", "∥[A:B]₀∥", ind));
    if e.is_scalar_index() {
        let dist = if in_index_set(ind, tol::INDEX) { 0.0 } else { 1.0 };
        out.push(Check::identity("index_values", "scalar index lies in {4cos²(π/n)} ∪ [4,∞)", dist, 0.0).with_value(ind));
    }
    if pair.is_connected() {
        let lam = &pair.lambda;
        let rows = lam.len();
        let cols = lam.first().map_or(0, |r| r.len());
        let m = CMatrix::from_fn(rows, rows, |i, j| num_complex::Complex64::new((0..cols).map(|k| (lam[i][k] * lam[j][k]) as f64).sum(), 0.0));
        let top = herm_eig(&m)?.values.last().copied().unwrap_or(0.0);
        out.push(Check::identity("index_perron_frobenius", "connected inclusion: [A:B]₀ = ∥Λ∥²", (ind - top).abs() / top.max(1e-300), tol::INDEX));
    }
    if let Some(g) = &ctx.model.group {
        let want = g.order() as f64 / g.subgroup.len() as f64;
        out.push(Check::identity("index_group", "[ℂG:ℂH]₀ = [G:H]", (ind - want).abs() / want, tol::INDEX));
    }
    let c = &ctx.cert;
    out.push(Check::identity("minimality_certificate", "H_E = Ind(E)·E_Z on B′∩A, E tracial there", if c.minimal { c.residual.max(c.tracial_residual) } else { f64::INFINITY }, 1e-8));
    if let Some(lit) = c.scalar_form_residual {
        out.push(Check::identity("minimality_scalar_form", "simple pair: H_E = c·E on B′∩A", lit, 1e-8));
    }
    // H_E lands in the center of A
    let comm = relative_commutant(pair.small.generators(), &pair.big);
    let mut hc: f64 = 0.0;
    for x in comm.basis() {
        let h = h_map(e, x);
        let s = (h.fro_norm() * ind).max(1e-300);
        for a in pair.big.generators() {
            hc = hc.max(h.commutator(a).fro_norm() / (s * a.fro_norm().max(1e-300)).max(1e-300) * ind);
        }
    }
    out.push(Check::identity("h_map_central", "H_E(x) ∈ Z(A) for x ∈ B′∩A", hc, 1e-9));
    let pp = pp_constant(e, seed, tol::PP_SAMPLES)?;
    let gap = (1.0 / ind - pp.c - 1e-6).max(0.0);
    out.push(Check::identity("pp_bound", "E(x) ≥ c x with c ≥ ∥Ind(E)∥⁻¹ (sampled)", gap, 0.0).with_value(pp.c));
    if pair.small.dim() == 1 && pair.big.dim() > 1 && !pair.big.is_commutative() {
        // a faithful state that is not a trace
        let mut r = seeded(seed ^ 0x57A7);
        let g = combination(&mut r, pair.big.basis());
        let sigma = g.adj_mul(&g).hermitian_part();
        let sigma = (&sigma + &CMatrix::identity(n).scale_re(0.1 * sigma.op_norm())).scale_re(1.0);
        let sigma = sigma.scale_re(1.0 / sigma.trace().re);
        let es = state_expectation(&pair.big, &sigma)?;
        let cert = minimality_check(&es)?;
        out.push(Check::flag("non_tracial_rejected", "E from a non-tracial state is not minimal", !cert.minimal));
    }
    out.extend(local_index(ctx)?);
    for nm in ctx.intermediates() {
        out.extend(prefixed(triple_checks(ctx, &nm)?, &nm.label));
    }
    Ok(out)
}

/// [A:B]₀ = [C:B]₀[A:C]₀ and E^C_B ∘ E^A_C = E^A_B for an intermediate.
fn triple_checks(ctx: &Context, c: &Named) -> Result<Vec<Check>> {
    let pair = &ctx.model.pair;
    let mut out = Vec::new();
    let ac = InclusionPair::new(pair.big.clone(), c.alg.clone())?;
    let cb = InclusionPair::new(c.alg.clone(), pair.small.clone())?;
    let (e_ac, _, _) = minimal_expectation(&ac, None, ctx.seed)?;
    let (e_cb, _, _) = minimal_expectation(&cb, None, ctx.seed)?;
    let i_ab = ctx.e0.index_norm();
    let (i_ac, i_cb) = (e_ac.index_norm(), e_cb.index_norm());
    let scalar = e_ac.is_scalar_index() && e_cb.is_scalar_index();
    out.push(Check::conditional("multiplicativity", "∥[A:B]₀ − [C:B]₀[A:C]₀∥ small", (i_ab - i_ac * i_cb).abs(), tol::INDEX, scalar));
    // trace-preserving expectations for the Markov trace compose
    let eac = tp_expectation(&pair.big, &c.alg, &ctx.tr)?;
    let ecb = tp_expectation(&c.alg, &pair.small, &ctx.tr)?;
    let mut worst: f64 = 0.0;
    for x in pair.big.basis() {
        let lhs = ecb.apply(&eac.apply(x));
        let rhs = ctx.e0.apply(x);
        worst = worst.max((&lhs - &rhs).fro_norm() / x.fro_norm().max(1e-300));
    }
    out.push(Check::identity("compatibility", "E^C_B ∘ E^A_C = E^A_B", worst, 1e-8));
    Ok(out)
}

/// Local index [pAp:pBp]₀ = tr(p)²[A:B]₀ p for projections p ∈ B′∩A.
fn local_index(ctx: &Context) -> Result<Vec<Check>> {
    let pair = &ctx.model.pair;
    let e = &ctx.e0;
    let n = e.ambient();
    let comm = relative_commutant(pair.small.generators(), &pair.big);
    if comm.dim() <= 1 {
        return Ok(vec![Check::undefined("local_index", "B′∩A = ℂ has no proper projections")]);
    }
    let simple = pair.big_blocks().len() == 1 && pair.small_blocks().len() == 1;
    let mut r = seeded(ctx.seed ^ 0x10CA);
    let h = hermitian_combination(&mut r, comm.basis());
    let eig = herm_eig(&h)?;
    let mut projs = Vec::new();
    for cl in eig.clusters(1e-8) {
        let p = eig.projection(&cl);
        if comm.residual(&p) <= tol::SUBSPACE {
            projs.push(p);
        }
    }
    let mut worst_qb: f64 = 0.0;
    let mut worst_ind: f64 = 0.0;
    for p in &projs {
        let trp = ctx.tr.eval(p).re;
        if trp <= 1e-12 {
            continue;
        }
        // E_p(x) = E₀(x)p / tr(p) with quasi-basis √tr(p)·pλp
        let qb: Vec<CMatrix> = e.quasi_basis.iter().map(|l| p.matmul(l).matmul(p).scale_re(trp.sqrt())).collect();
        let ep = |x: &CMatrix| e.apply(x).matmul(p).scale_re(1.0 / trp);
        for a in pair.big.basis() {
            let x = p.matmul(a).matmul(p);
            let nx = x.fro_norm();
            if nx < 1e-12 {
                continue;
            }
            let mut s = CMatrix::zeros(n, n);
            for l in &qb {
                s += &l.matmul(&ep(&l.adj_mul(&x)));
            }
            worst_qb = worst_qb.max((&s - &x).fro_norm() / nx);
        }
        let mut ind = CMatrix::zeros(n, n);
        for l in &qb {
            ind += &l.matmul(&l.adjoint());
        }
        worst_ind = worst_ind.max(rel(&ind, &p.scale_re(trp * trp * e.index_norm())));
    }
    // the local pair pBp ⊂ pAp is also exercised through the compression routine
    let compressed = projs.first().map(|p| compress_by_projection(p, pair).is_ok()).unwrap_or(true);
    Ok(vec![
        Check::conditional("local_quasi_basis", "{√tr(p)·pλᵢp} is a quasi-basis for E_p", worst_qb, tol::QUASI_BASIS, simple),
        Check::conditional("local_index", "[pAp:pBp]₀ = tr(p)²[A:B]₀ p", worst_ind, tol::INDEX, simple),
        Check::flag("local_compression", "pBp ⊂ pAp is an inclusion with unit p", compressed),
    ])
}

// ---------------------------------------------------------------- tower

/// Temperley–Lieb relations, implementation of expectations, Markov property, dimension
/// bounds, dual expectation, push-down, multi-step projections and composed quasi-bases.
pub fn tower_suite(ctx: &Context, depth: usize) -> Result<Vec<Check>> {
    let tw = ctx.tower(depth)?;
    let mut out = Vec::new();
    let n = tw.ambient();
    let tau = tw.tau;
    let t8 = 1e-8;
    let mut r = seeded(ctx.seed ^ 0x70E5);
    out.push(Check::record("tau", "τ = ∥[A:B]₀∥⁻¹", tau));
    let mut proj_res: f64 = 0.0;
    let mut tl: f64 = 0.0;
    let mut far: f64 = 0.0;
    let mut implement: f64 = 0.0;
    let mut markov: f64 = 0.0;
    for j in 1..=depth {
        let ej = tw.e(j);
        proj_res = proj_res.max(projection_residual(ej));
        for i in 1..=depth {
            if i + 1 == j || j + 1 == i {
                tl = tl.max(rel(&ej.matmul(tw.e(i)).matmul(ej), &ej.scale_re(tau)));
            }
            if i + 2 <= j {
                far = far.max(rel(&ej.matmul(tw.e(i)), &tw.e(i).matmul(ej)));
            }
        }
        // e_j x e_j = E_{j−1}(x) e_j for x ∈ A_{j−1}
        let upper = j as isize - 1;
        for x in tw.level(upper).basis.iter().take(64) {
            let lhs = ej.matmul(x).matmul(ej);
            let rhs = tw.proj(upper - 1, x).matmul(ej);
            implement = implement.max((&lhs - &rhs).fro_norm() / (x.fro_norm() * ej.fro_norm()).max(1e-300));
        }
        // tr(x e_j) = τ tr(x) on A_{j−1}
        let mut tests: Vec<CMatrix> = tw.level(upper).basis.iter().take(32).cloned().collect();
        tests.extend(tw.commutant(j - 1, Of::B).iter().take(32).cloned());
        for x in &tests {
            let lhs = tw.tr(&x.matmul(ej));
            let rhs = tw.tr(x) * tau;
            markov = markov.max((lhs - rhs).norm() / tw.ip().norm(x).max(1e-300));
        }
    }
    if depth >= 1 {
        out.push(Check::identity("e_projection", "e_j² = e_j = e_j*", proj_res, t8));
        out.push(Check::identity("e_implements", "e_j x e_j = E_{j−1}(x) e_j", implement, t8));
        out.push(Check::identity("markov", "tr(x e_j) = τ tr(x)", markov, t8));
    }
    if depth >= 2 {
        out.push(Check::identity("temperley_lieb", "e_i e_{i±1} e_i = τ e_i", tl, t8));
    }
    if depth >= 3 {
        out.push(Check::identity("e_far_commute", "e_i e_j = e_j e_i for |i − j| ≥ 2", far, t8));
    }
    for k in 1..depth {
        let lhs = tw.e_run(1, k + 1).matmul(&tw.e_run(k + 1, 1));
        out.push(Check::identity(&format!("jones_word[{k}]"), "(e₁⋯e_{k+1})(e_{k+1}⋯e₁) = τᵏ e₁", rel(&lhs, &tw.e(1).scale_re(tau.powi(k as i32))), t8));
    }
    // trace: unital, tracial on each level
    let one = CMatrix::identity(n);
    let mut tracial: f64 = 0.0;
    let top = tw.level(depth as isize).basis.clone();
    for _ in 0..8 {
        let x = combination(&mut r, &top);
        let y = combination(&mut r, &top);
        let d = (tw.tr(&x.matmul(&y)) - tw.tr(&y.matmul(&x))).norm();
        tracial = tracial.max(d / (tw.ip().norm(&x) * tw.ip().norm(&y)).max(1e-300));
    }
    out.push(Check::identity("trace_unital", "tr(1) = 1", (tw.tr(&one).re - 1.0).abs(), 1e-10));
    out.push(Check::identity("trace_tracial", "tr(xy) = tr(yx) on the top level", tracial, 1e-10));
    // relative commutant dimensions
    // the bound goes through the local index formula, which needs A and B simple
    let simple = ctx.model.pair.big_blocks().len() == 1 && ctx.model.pair.small_blocks().len() == 1;
    for k in 0..=depth {
        let d = tw.commutant(k, Of::B).len() as f64;
        let bound = tw.index.powi(k as i32 + 1);
        out.push(Check::conditional(&format!("commutant_dim[{k}]"), "dim B′∩A_k ≤ ∥[A:B]₀∥^{k+1}", (d - bound - tol::INDEX).max(0.0), 0.0, simple).with_value(d));
    }
    if depth >= 1 {
        let mut s = CMatrix::zeros(n, n);
        for l in tw.lambda() {
            s += &l.matmul(tw.e(1)).matmul(&l.adjoint());
        }
        out.push(Check::identity("support", "Σ λ e₁ λ* = 1", rel(&s, &one), t8));
        out.push(e1_commutant_is_b(&tw));
        // dual expectation
        let dual = tw.dual_expectation()?;
        out.push(Check::identity("dual_index", "[A₁:A]₀ = [A:B]₀", (dual.index_norm() - tw.index).abs() / tw.index, tol::INDEX));
        let dqb = tw.dual_quasi_basis();
        let tests: Vec<CMatrix> = tw.level(1).basis.iter().take(64).cloned().collect();
        out.push(Check::identity("dual_quasi_basis", "{[A:B]₀^{1/2} λ e₁} is a quasi-basis for Ẽ", tw.quasi_basis_residual(0, &dqb, &tests), 1e-8));
        let dc = minimality_check(&dual)?;
        out.push(Check::flag("dual_minimal", "the dual of a minimal expectation is minimal", dc.minimal));
        let ee = tw.proj(0, tw.e(1));
        out.push(Check::identity("dual_of_e1", "Ẽ(e₁) = [A:B]₀⁻¹", rel(&ee, &one.scale_re(tau)), t8));
        // push-down on a random battery
        let a1 = tw.level(1).basis.clone();
        let mut pd: f64 = 0.0;
        for _ in 0..100 {
            let x1 = combination(&mut r, &a1);
            let x0 = tw.push_down(&x1);
            let lhs = x1.matmul(tw.e(1));
            pd = pd.max((&lhs - &x0.matmul(tw.e(1))).fro_norm() / x1.fro_norm().max(1e-300)).max(tw.level_residual(0, &x0) * (x0.fro_norm() / x1.fro_norm().max(1e-300)));
        }
        out.push(Check::identity("push_down", "x₁e₁ = x₀e₁ with x₀ = [A:B]₀ Ẽ(x₁e₁) ∈ A", pd, t8));
        // commutant expectation
        let e1 = tw.commutant_expectation(tw.e(1));
        out.push(Check::identity("commutant_expectation_e1", "E^{B′∩A₁}_{A′∩A₁}(e₁) = τ", rel(&e1, &one.scale_re(tau)), t8));
        let mut ce: f64 = 0.0;
        for k in 1..=depth {
            let x = combination(&mut r, tw.commutant(k, Of::B));
            let y = tw.commutant_expectation(&x);
            let z = project(tw.commutant(k, Of::A), tw.ip(), &x);
            ce = ce.max(rel(&y, &z)).max(tw.commutant_residual(k, Of::A, &y) * y.fro_norm() / x.fro_norm().max(1e-300));
        }
        out.push(Check::identity("commutant_expectation", "τ Σ λ x λ* is the trace-preserving expectation onto A′∩A_k", ce, t8));
        // composed quasi-basis
        let cq = tw.composed_quasi_basis(1);
        match cq {
            Ok(qb) => {
                let tests: Vec<CMatrix> = tw.level(1).basis.iter().take(64).cloned().collect();
                let res = tw.quasi_basis_residual(-1, &qb, &tests);
                out.push(Check::identity("composed_quasi_basis", "quasi-basis of E₀∘E₁", res, 1e-7));
                let mut ind = CMatrix::zeros(n, n);
                for q in &qb {
                    ind += &q.matmul(&q.adjoint());
                }
                out.push(Check::identity("composed_index", "Ind(E₀∘E₁) = τ⁻²", rel(&ind, &one.scale_re(tau.powi(-2))), 1e-7));
            }
            Err(e) => out.push(err_check("composed_quasi_basis", "quasi-basis of E₀∘E₁", e)),
        }
    }
    match tw.multi_step_projection(1) {
        Ok(p) => {
            out.push(Check::identity("multi_step_projection", "e_{[−1,3]} is a projection", projection_residual(&p), t8));
            out.push(Check::identity("multi_step_trace", "tr(e_{[−1,3]}) = τ²", (tw.tr(&p).re - tau * tau).abs() / (tau * tau), t8));
            // e_{[−1,3]} implements E₀∘E₁: e x e = E(x) e for x ∈ A₁
            let mut m: f64 = 0.0;
            for x in tw.level(1).basis.iter().take(64) {
                let lhs = p.matmul(x).matmul(&p);
                let rhs = tw.proj(-1, x).matmul(&p);
                m = m.max((&lhs - &rhs).fro_norm() / (x.fro_norm() * p.fro_norm()).max(1e-300));
            }
            out.push(Check::identity("multi_step_implements", "e_{[−1,3]} x e_{[−1,3]} = E^{A₁}_B(x) e_{[−1,3]}", m, t8));
        }
        Err(e) => out.push(err_check("multi_step_projection", "e_{[−1,3]} is a projection", e)),
    }
    Ok(out)
}

// ---------------------------------------------------------------- fourier

/// Number of random elements per battery.
const BATTERY: usize = 6;

pub fn fourier_suite(ctx: &Context, tw: &Tower) -> Vec<Check> {
    let fr = Fourier::new(tw);
    let mut r = seeded(ctx.seed ^ 0xF0F0);
    let mut out = Vec::new();
    let n = tw.ambient();
    let one = CMatrix::identity(n);
    let tau = tw.tau;
    let t8 = 1e-8;
    let irr = irreducible(tw);
    for k in 1..=2usize {
        if tw.depth < k + 1 {
            out.push(Check::undefined(&format!("fourier_inverse[{k}]"), "F_k⁻¹∘F_k = Id (tower too shallow)"));
            continue;
        }
        let bk = tw.commutant(k, Of::B).to_vec();
        let ak = tw.commutant(k + 1, Of::A).to_vec();
        let (mut inv1, mut inv2, mut proj, mut memb, mut rot): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut err = None;
        for _ in 0..BATTERY {
            let x = combination(&mut r, &bk);
            let y = combination(&mut r, &ak);
            let res = (|| -> Result<()> {
                let fx = fr.fourier(k, &x)?;
                inv1 = inv1.max(rel(&fr.fourier_inv(k, &fx)?, &x));
                inv2 = inv2.max(rel(&fr.fourier(k, &fr.fourier_inv(k, &y)?)?, &y));
                proj = proj.max(rel(&fr.fourier_by_projection(k, &x)?, &fx));
                memb = memb.max(tw.commutant_residual(k + 1, Of::A, &fx));
                rot = rot.max(rel(&fr.rotation(k, &x)?, &fr.rotation_by_basis(k, &x)?));
                Ok(())
            })();
            if let Err(e) = res {
                err = Some(e);
                break;
            }
        }
        if let Some(e) = err {
            out.push(err_check(&format!("fourier_inverse[{k}]"), "F_k⁻¹∘F_k = Id", e));
            continue;
        }
        out.push(Check::identity(&format!("fourier_inverse[{k}]"), "F_k⁻¹∘F_k = Id", inv1, t8));
        out.push(Check::identity(&format!("fourier_inverse_right[{k}]"), "F_k∘F_k⁻¹ = Id", inv2, t8));
        out.push(Check::identity(&format!("fourier_projection[{k}]"), "F_k through the expectation equals F_k through the ambient projection", proj, t8));
        out.push(Check::identity(&format!("fourier_lands[{k}]"), "F_k(x) ∈ A′∩A_{k+1}", memb, tol::SUBSPACE));
        out.push(Check::identity(&format!("rotation_formula[{k}]"), "(F_k⁻¹(F_k(x)*))* = τ^{−k} Σ E_k(e_k⋯e₁λx) e_k⋯e₁λ*", rot, t8));
        let run = tw.e_run(1, k);
        out.push(residual_check(
            &format!("fourier_of_jones_word[{k}]"),
            "F_k(e₁⋯e_k) = τ^{k/2}",
            fr.fourier(k, &run).map(|f| rel(&f, &one.scale_re(tau.powf(k as f64 / 2.0)))),
            t8,
        ));
        out.push(residual_check(
            &format!("fourier_inverse_of_one[{k}]"),
            "F_k⁻¹(1) = τ^{−k/2} e₁⋯e_k",
            fr.fourier_inv(k, &one).map(|f| rel(&f, &run.scale_re(tau.powf(-(k as f64) / 2.0)))),
            t8,
        ));
        let mut adj: f64 = 0.0;
        let mut aerr = None;
        for _ in 0..BATTERY {
            let x = combination(&mut r, &bk);
            match fr.adjoint_rule_defect(k, &x) {
                Ok(v) => adj = adj.max(v),
                Err(e) => aerr = Some(e),
            }
        }
        let stmt = if k == 1 { "(F₁(x))* = F₁(γ₀(x*))" } else { "(F₂(x))* = F₂(ρ₂(x)*)" };
        out.push(match aerr {
            Some(e) => err_check(&format!("adjoint_rule[{k}]"), stmt, e),
            None => Check::identity(&format!("adjoint_rule[{k}]"), stmt, adj, t8),
        });
        // coproduct
        let id = fr.coproduct_identity(k);
        let mut assoc: f64 = 0.0;
        let mut unit: f64 = 0.0;
        let mut cerr = None;
        let triples = if k == 1 { 50 } else { 10 };
        for _ in 0..triples {
            let x = combination(&mut r, &bk);
            let y = combination(&mut r, &bk);
            let z = combination(&mut r, &bk);
            let res = (|| -> Result<()> {
                let a1 = fr.coproduct(k, &fr.coproduct(k, &x, &y)?, &z)?;
                let a2 = fr.coproduct(k, &x, &fr.coproduct(k, &y, &z)?)?;
                assoc = assoc.max(rel(&a1, &a2));
                unit = unit.max(rel(&fr.coproduct(k, &x, &id)?, &x)).max(rel(&fr.coproduct(k, &id, &x)?, &x));
                Ok(())
            })();
            if let Err(e) = res {
                cerr = Some(e);
                break;
            }
        }
        match cerr {
            Some(e) => out.push(err_check(&format!("coproduct_associative[{k}]"), "(x∘y)∘z = x∘(y∘z)", e)),
            None => {
                out.push(Check::identity(&format!("coproduct_associative[{k}]"), "(x∘y)∘z = x∘(y∘z)", assoc, 1e-7));
                out.push(Check::identity(&format!("coproduct_identity[{k}]"), "x∘(τ^{−k/2}e₁⋯e_k) = x = (τ^{−k/2}e₁⋯e_k)∘x", unit, t8));
            }
        }
    }
    if tw.depth >= 2 {
        let b1 = tw.commutant(1, Of::B).to_vec();
        let mut iso: f64 = 0.0;
        let mut iso_inv: f64 = 0.0;
        for x in &b1 {
            if let Ok(v) = fr.isometry_defect(1, x) {
                iso = iso.max(v);
            }
        }
        for y in tw.commutant(2, Of::A) {
            if let Ok(x) = fr.fourier_inv(1, y) {
                iso_inv = iso_inv.max((fr.norm2(&x) - fr.norm2(y)).abs() / fr.norm2(y).max(1e-300));
            }
        }
        out.push(Check::identity("fourier_isometry", "∥F₁(x)∥₂ = ∥x∥₂ on the B′∩A₁ basis", iso, t8));
        out.push(Check::identity("fourier_inverse_isometry", "∥F₁⁻¹(y)∥₂ = ∥y∥₂ on the A′∩A₂ basis", iso_inv, t8));
        out.push(residual_check("fourier_e1", "F₁(e₁) = [A:B]₀^{−1/2}·1", fr.fourier(1, tw.e(1)).map(|f| rel(&f, &one.scale_re(tau.sqrt()))), t8));
        let (mut inv, mut anti, mut star, mut trc): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..BATTERY {
            let x = combination(&mut r, &b1);
            let y = combination(&mut r, &b1);
            if let (Ok(gx), Ok(gy), Ok(gxy), Ok(gxs)) = (fr.gamma0(&x), fr.gamma0(&y), fr.gamma0(&x.matmul(&y)), fr.gamma0(&x.adjoint())) {
                if let Ok(ggx) = fr.gamma0(&gx) {
                    inv = inv.max(rel(&ggx, &x));
                }
                anti = anti.max(rel(&gxy, &gy.matmul(&gx)));
                star = star.max(rel(&gx.adjoint(), &gxs));
                trc = trc.max((tw.tr(&gx) - tw.tr(&x)).norm() / tw.ip().norm(&x).max(1e-300));
            }
        }
        out.push(Check::identity("gamma0_involution", "γ₀² = Id", inv, t8));
        out.push(Check::identity("gamma0_anti_multiplicative", "γ₀(xy) = γ₀(y)γ₀(x)", anti, t8));
        out.push(Check::identity("gamma0_star", "γ₀(x)* = γ₀(x*)", star, t8));
        out.push(residual_check("gamma0_e1", "γ₀(e₁) = e₁", fr.gamma0(tw.e(1)).map(|g| rel(&g, tw.e(1))), t8));
        out.push(Check::conditional("gamma0_trace", "γ₀ preserves tr (measured; proved when B′∩A = ℂ)", trc, t8, irr));
        let a1 = tw.commutant(1, Of::A).len();
        out.push(Check::conditional("irreducibility_transport", "dim B′∩A = 1 forces dim A′∩A₁ = 1", (a1 as f64 - 1.0).abs(), 0.0, irr));
    }
    if tw.depth >= 3 {
        let b3 = tw.commutant(3, Of::B).to_vec();
        let b1 = tw.commutant(1, Of::B).to_vec();
        let a13: Vec<CMatrix> = {
            let a1 = tw.level_algebra(1);
            crate::staralg::commutant_basis(a1.generators(), &tw.level_algebra(3))
        };
        let (mut g1inv, mut rho3, mut g1anti): (f64, f64, f64) = (0.0, 0.0, 0.0);
        let (mut s_in, mut s_mul, mut s_star, mut s_tr, mut s_inv, mut s_inv2): (f64, f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let mut err = None;
        for _ in 0..BATTERY.min(3) {
            let y = combination(&mut r, &b3);
            let z = combination(&mut r, &b3);
            let x = combination(&mut r, &b1);
            let w = combination(&mut r, &b1);
            let v = combination(&mut r, &a13);
            let res = (|| -> Result<()> {
                let gy = fr.gamma1(&y)?;
                g1inv = g1inv.max(rel(&fr.gamma1(&gy)?, &y));
                rho3 = rho3.max(rel(&fr.rho3(&fr.rho3(&y)?)?, &gy));
                g1anti = g1anti.max(rel(&fr.gamma1(&y.matmul(&z))?, &fr.gamma1(&z)?.matmul(&gy)));
                let sx = fr.shift(&x)?;
                let sw = fr.shift(&w)?;
                let sx_n = sx.fro_norm().max(1e-300);
                let gens = tw.level(1).gens.clone();
                let c = gens.iter().map(|g| sx.commutator(g).fro_norm() / (sx_n * g.fro_norm().max(1e-300))).fold(0.0, f64::max);
                s_in = s_in.max(c.max(tw.level_residual(3, &sx)));
                s_mul = s_mul.max(rel(&fr.shift(&x.matmul(&w))?, &sx.matmul(&sw)));
                s_star = s_star.max(rel(&fr.shift(&x.adjoint())?, &sx.adjoint()));
                s_tr = s_tr.max((tw.tr(&sx) - tw.tr(&x)).norm() / tw.ip().norm(&x).max(1e-300));
                s_inv = s_inv.max(rel(&fr.shift_inv(&sx)?, &x));
                s_inv2 = s_inv2.max(rel(&fr.shift(&fr.shift_inv(&v)?)?, &v));
                Ok(())
            })();
            if let Err(e) = res {
                err = Some(e);
                break;
            }
        }
        if let Some(e) = err {
            out.push(err_check("gamma1_involution", "γ₁² = Id", e));
        } else {
            out.push(Check::identity("gamma1_involution", "γ₁² = Id", g1inv, t8));
            out.push(Check::identity("rho3_square_root", "(ρ₃)² = γ₁", rho3, t8));
            out.push(Check::identity("gamma1_anti_multiplicative", "γ₁(yz) = γ₁(z)γ₁(y)", g1anti, t8));
            out.push(Check::identity("shift_lands", "γ₁γ₀(B′∩A₁) ⊂ A₁′∩A₃", s_in, tol::SUBSPACE));
            out.push(Check::identity("shift_multiplicative", "shift(xy) = shift(x)shift(y)", s_mul, t8));
            out.push(Check::identity("shift_star", "shift(x*) = shift(x)*", s_star, t8));
            out.push(Check::conditional("shift_trace", "shift preserves tr (measured; proved when B′∩A = ℂ)", s_tr, t8, irr));
            out.push(Check::identity("shift_inverse", "γ₀γ₁∘γ₁γ₀ = Id on B′∩A₁", s_inv, t8));
            out.push(Check::identity("shift_inverse_right", "γ₁γ₀∘γ₀γ₁ = Id on A₁′∩A₃", s_inv2, t8));
            out.push(Check::identity("shift_dimensions", "dim B′∩A₁ = dim A₁′∩A₃", (b1.len() as f64 - a13.len() as f64).abs(), 0.0));
        }
        out.push(residual_check("shift_one", "shift(1) = 1", fr.shift(&one).map(|s| rel(&s, &one)), t8));
        out.push(residual_check("shift_e1", "γ₁γ₀(e₁) = e₃", fr.shift(tw.e(1)).map(|s| rel(&s, tw.e(3))), t8));
    } else {
        out.push(Check::undefined("gamma1_involution", "γ₁² = Id (needs A₃)"));
    }
    out
}

// ---------------------------------------------------------------- biproj

pub fn biproj_suite(ctx: &Context, tw: &Tower) -> Result<Vec<Check>> {
    let fr = Fourier::new(tw);
    let mut out = Vec::new();
    let n = tw.ambient();
    let one = CMatrix::identity(n);
    let tau = tw.tau;
    out.push(residual_check("fourier_e1", "F₁(e₁) = [A:B]₀^{−1/2}·1", fr.fourier(1, tw.e(1)).map(|f| rel(&f, &one.scale_re(tau.sqrt()))), 1e-8));
    out.push(e1_commutant_is_b(tw));
    out.push(Check::record("irreducible", "dim B′∩A (1 means irreducible)", tw.commutant(0, Of::B).len() as f64));
    // e₁ itself: the biprojection of C = B
    match classify(&fr, 1, tw.e(1)) {
        Ok(be) => {
            let ok = be.kind == BiKind::Biprojection && be.t.is_some_and(|t| (t - tau.sqrt()).abs() <= tol::INDEX);
            out.push(Check::flag("e1_biprojection", "e₁ is a biprojection with t = [A:B]₀^{−1/2}", ok));
            match scalar_relations(&fr, &be) {
                Ok(cs) => out.extend(prefixed(cs, "B")),
                Err(e) => out.push(err_check("scalar_relations[B]", "scalar relations of e₁", e)),
            }
        }
        Err(e) => out.push(err_check("e1_biprojection", "e₁ is a biprojection", e)),
    }
    let mut named = ctx.intermediates();
    named.insert(0, Named { label: "A".into(), alg: ctx.model.pair.big.clone() });
    named.insert(0, Named { label: "B".into(), alg: ctx.model.pair.small.clone() });
    for nm in &named {
        let c = match Intermediate::new(tw, &nm.label, &nm.alg) {
            Ok(c) => c,
            Err(e) => {
                out.push(err_check(&format!("intermediate[{}]", nm.label), "intermediate embeds in the tower", e));
                continue;
            }
        };
        let mut cs = jones_relations(&fr, &c);
        cs.push(residual_check("intermediate_basis", "Σ δ e_B δ* = e_D for a second quasi-basis δ", intermediate_basis_identity(tw, &c), tol::QUASI_BASIS));
        match classify(&fr, 1, &c.e) {
            Ok(be) if be.kind == BiKind::Biprojection => {
                if nm.label != "B" {
                    match scalar_relations(&fr, &be) {
                        Ok(x) => cs.extend(x.into_iter().filter(|c| !c.name.starts_with("e1_"))),
                        Err(e) => cs.push(err_check("scalar_relations", "scalar relations", e)),
                    }
                }
                match exchange_check(&fr, &be) {
                    Ok(x) => cs.extend(x),
                    Err(e) => cs.push(err_check("exchange", "exchange relation", e)),
                }
                match intermediate_from_biprojection(&fr, &be) {
                    Ok((p, x)) => {
                        cs.extend(x);
                        // {e}′∩A recovers C
                        let ce = relative_commutant(std::slice::from_ref(&c.e), &tw.level_algebra(0));
                        let ce = crate::staralg::Algebra::from_parts(n, tw.ip().clone(), orthonormalize(ce.basis(), tw.ip()), Vec::new(), None);
                        cs.push(Check::identity("commutant_recovers_C", "{e_C}′∩A = C", ce.subspace_distance(&c.alg), tol::SUBSPACE));
                        cs.push(Check::record("P_dim", "dim of P = span(A e A)", p.dim() as f64));
                    }
                    Err(e) => cs.push(err_check("intermediate_from_biprojection", "P = span(A e A)", e)),
                }
            }
            Ok(_) => {}
            Err(e) => cs.push(err_check("classify", "classification of e_C", e)),
        }
        out.extend(prefixed(cs, &nm.label));
    }
    // e₁ central and minimal in B′∩A₁; gated on irreducibility inside
    out.extend(crate::biproj::e1_central_minimal(tw));
    Ok(out)
}

// ---------------------------------------------------------------- angles

pub fn angles_suite(ctx: &Context, tw: &Tower) -> Result<Vec<Check>> {
    let fr = Fourier::new(tw);
    let mut out = Vec::new();
    let ints = ctx.model.intermediates.clone();
    let mut built = Vec::new();
    for nm in &ints {
        built.push(Intermediate::new(tw, &nm.label, &nm.alg)?);
    }
    for &(i, j) in &ctx.model.quadruples {
        let (c, d) = (&built[i], &built[j]);
        let q = Quadruple::new(tw, c, d);
        let tag = format!("{}|{}", c.label, d.label);
        let mut cs = Vec::new();
        match q.interior() {
            Ok(a) => cs.push(Check::record("alpha", "interior angle α(C,D) (radians)", a.angle)),
            Err(e) => cs.push(err_check("alpha", "interior angle", e)),
        }
        match q.exterior() {
            Ok(b) => cs.push(Check::record("beta", "exterior angle β(C,D) (radians)", b.angle)),
            Err(e) => cs.push(err_check("beta", "exterior angle", e)),
        }
        cs.push(Check::record("t", "t = [A:B]₀ tr(e_C e_D)", q.t()));
        cs.push(Check::record("r", "r = [C:B]₀/[A:D]₀", q.r()));
        cs.extend(angle_suite(&fr, &q));
        cs.extend(pq_suite(&fr, &q));
        let kind = commuting_square_check(&q);
        cs.push(Check::with_status("commuting_square", &format!("classification: {kind}"), Status::Pass, None, 0.0));
        out.extend(prefixed(cs, &tag));
    }
    Ok(out)
}

// ---------------------------------------------------------------- lattice

pub fn lattice_suite(ctx: &Context, cap: usize) -> Result<(Vec<Check>, Lattice)> {
    let lat = lattice::enumerate_with_cap(&ctx.model, ctx.seed, cap)?;
    let mut out = Vec::new();
    out.push(Check::record("nodes", "number of enumerated intermediates (including B and A)", lat.len() as f64));
    out.push(Check::record("minimal_nodes", "number of minimal intermediates", lat.minimal().len() as f64));
    out.push(Check::with_status(
        "enumeration",
        if lat.exact { "exact (set-partition search)" } else { "heuristic (subgroups, biprojection search, closure sweep)" },
        Status::Pass,
        None,
        0.0,
    ));
    out.extend(lattice::bound_check(&lat, ctx.seed));
    out.push(lattice::compatibility_check(&lat, &ctx.tr)?);
    out.extend(lattice::lattice_rigidity(&ctx.model, &lat, ctx.seed)?);
    // Kadison–Kastler distance: B against A, and between the first two named intermediates
    let b = &lat.nodes[0].alg;
    let a = &lat.nodes[lat.len() - 1].alg;
    let kk = kk_distance(b, a, ctx.seed);
    out.push(Check::identity("kk_bracket[B|A]", "lower ≤ upper for the distance estimate", (kk.lower - kk.upper - 1e-12).max(0.0), 0.0).with_value(kk.upper));
    if let Some(eq) = kk.equal_by_onto {
        out.push(Check::flag("kk_onto[B|A]", "B ⊆ A and d(B,A) < 1 force B = A", eq));
    }
    if ctx.model.intermediates.len() >= 2 {
        let (c, d) = (&ctx.model.intermediates[0], &ctx.model.intermediates[1]);
        let kk = kk_distance(&c.alg, &d.alg, ctx.seed);
        out.push(Check::identity(&format!("kk_bracket[{}|{}]", c.label, d.label), "lower ≤ upper for the distance estimate", (kk.lower - kk.upper - 1e-12).max(0.0), 0.0).with_value(kk.upper));
    }
    Ok((out, lat))
}
