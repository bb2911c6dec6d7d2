//! Biunitaries, biprojections and bipartial isometries; the relations they satisfy; and the
//! Jones projections e_C, e_{C₁}, e_{C₂} of an intermediate B ⊆ C ⊆ A.

use crate::expect::{module_basis, watatani_index};
use crate::fourier::Fourier;
use crate::numkernel::{herm_eig, orthonormalize, project, CMatrix};
use crate::report::Check;
use crate::staralg::{commutant_basis, span_closure_ip, Algebra};
use crate::tower::{projection_residual, rel, Of, Tower};
use crate::{tol, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiKind {
    Biunitary,
    Biprojection,
    BipartialIsometry,
    None,
}

impl BiKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BiKind::Biunitary => "biunitary",
            BiKind::Biprojection => "biprojection",
            BiKind::BipartialIsometry => "bipartial_isometry",
            BiKind::None => "none",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BiElement {
    pub k: usize,
    pub value: CMatrix,
    pub fourier_value: CMatrix,
    pub kind: BiKind,
    /// F(e) = t·f for a biprojection e.
    pub t: Option<f64>,
    pub f: Option<CMatrix>,
}

fn unitary_residual(x: &CMatrix) -> f64 {
    let i = CMatrix::identity(x.rows());
    rel(&x.adj_mul(x), &i).max(rel(&x.matmul(&x.adjoint()), &i))
}

/// Residual of x/∥x∥ being a partial isometry.
fn partial_isometry_residual(x: &CMatrix) -> f64 {
    let s = x.op_norm();
    if s == 0.0 {
        return f64::INFINITY;
    }
    let v = x.scale_re(1.0 / s);
    rel(&v.matmul(&v.adjoint()).matmul(&v), &v)
}

/// Snap a near-projection to the spectral projection onto eigenvalues above 1/2.
pub fn snap_projection(p: &CMatrix) -> Result<CMatrix> {
    let e = herm_eig(&p.hermitian_part())?;
    Ok(e.apply(|x| if x > 0.5 { 1.0 } else { 0.0 }))
}

pub fn classify(fr: &Fourier, k: usize, x: &CMatrix) -> Result<BiElement> {
    let fx = fr.fourier(k, x)?;
    let tolp = tol::PROJECTION;
    let mut out = BiElement { k, value: x.clone(), fourier_value: fx.clone(), kind: BiKind::None, t: None, f: None };
    if unitary_residual(x) <= tolp && unitary_residual(&fx) <= tolp {
        out.kind = BiKind::Biunitary;
        return Ok(out);
    }
    if x.fro_norm() > 0.0 && projection_residual(x) <= tolp {
        let t = fx.op_norm();
        if t > 0.0 {
            let f = fx.scale_re(1.0 / t);
            if projection_residual(&f) <= tolp {
                out.kind = BiKind::Biprojection;
                out.t = Some(t);
                out.f = Some(snap_projection(&f)?);
                return Ok(out);
            }
        }
    }
    if partial_isometry_residual(x) <= tolp && partial_isometry_residual(&fx) <= tolp {
        out.kind = BiKind::BipartialIsometry;
    }
    Ok(out)
}

/// dim B′∩A = 1.
pub fn irreducible(t: &Tower) -> bool {
    t.commutant(0, Of::B).len() == 1
}

fn require_biprojection(e: &BiElement) -> Result<(f64, &CMatrix)> {
    match (e.kind, e.t, e.f.as_ref()) {
        (BiKind::Biprojection, Some(t), Some(f)) => Ok((t, f)),
        _ => Err(Error::NotBiprojection(format!("classified as {}", e.kind.as_str()))),
    }
}

/// Scalar relations satisfied by a biprojection e ∈ B′∩A₁ with F(e) = t·f.
pub fn scalar_relations(fr: &Fourier, e: &BiElement) -> Result<Vec<Check>> {
    let (t, f) = require_biprojection(e)?;
    let tw = fr.tower;
    let irr = irreducible(tw);
    let x = &e.value;
    let e1 = tw.e(1);
    let n = tw.ambient();
    let tol8 = tol::PROJECTION;
    let mut out = Vec::new();
    let r1 = rel(&x.matmul(e1), e1).max(rel(&e1.matmul(x), e1));
    out.push(Check::conditional("ee1", "e e₁ = e₁ e = e₁", r1, tol8, irr));
    let tre = tw.tr(x).re;
    let e1x = tw.proj(0, x);
    out.push(Check::conditional("E1_of_e_scalar", "E₁(e) = tr(e)·1", rel(&e1x, &CMatrix::identity(n).scale_re(tre)), tol8, irr));
    let sq = t * tw.tau.sqrt();
    out.push(Check::conditional("tr_e", "tr(e) = t τ^{1/2}", (tre - sq).abs() / sq.max(1e-300), tol8, irr));
    let tref = tw.tr(&x.matmul(f)).re;
    out.push(Check::conditional("tr_ef", "tr(e f) = τ", (tref - tw.tau).abs() / tw.tau, tol8, irr));
    if tw.depth >= 2 {
        let lhs = f.matmul(e1).matmul(tw.e(2));
        let rhs = x.matmul(tw.e(2)).scale_re(tw.tau.sqrt() / t);
        out.push(Check::conditional("f_e1_e2", "f e₁ e₂ = t⁻¹ τ^{1/2} e e₂", rel(&lhs, &rhs), tol8, irr));
    }
    out.extend(e1_central_minimal(tw));
    Ok(out)
}

/// e₁ is a minimal central projection of B′∩A₁.
pub fn e1_central_minimal(tw: &Tower) -> Vec<Check> {
    let irr = irreducible(tw);
    let e1 = tw.e(1);
    let basis = tw.commutant(1, Of::B);
    let mut central: f64 = 0.0;
    let mut minimal: f64 = 0.0;
    for x in basis {
        let nx = x.fro_norm().max(1e-300);
        central = central.max(e1.commutator(x).fro_norm() / nx);
        // e₁ x e₁ must be a multiple of e₁
        let y = e1.matmul(x).matmul(e1);
        let c = tw.tr(&y) / tw.tau;
        minimal = minimal.max((&y - &e1.scale(c)).fro_norm() / nx);
    }
    vec![
        Check::conditional("e1_central", "e₁ is central in B′∩A₁", central, tol::PROJECTION, irr),
        Check::conditional("e1_minimal", "e₁ is a minimal projection of B′∩A₁", minimal, tol::PROJECTION, irr),
    ]
}

/// ef = fe = e e₂ e / tr(e), and ef is again a biprojection (at level 2).
pub fn exchange_check(fr: &Fourier, e: &BiElement) -> Result<Vec<Check>> {
    let (_, f) = require_biprojection(e)?;
    let tw = fr.tower;
    let irr = irreducible(tw);
    let x = &e.value;
    let tol8 = tol::PROJECTION;
    let mut out = Vec::new();
    if tw.depth < 2 {
        out.push(Check::undefined("exchange", "e f = f e = e e₂ e / tr(e) (needs A₂)"));
        return Ok(out);
    }
    let ef = x.matmul(f);
    let fe = f.matmul(x);
    let tre = tw.tr(x).re;
    let ee2e = x.matmul(tw.e(2)).matmul(x).scale_re(1.0 / tre);
    out.push(Check::conditional("ef_eq_fe", "e f = f e", rel(&ef, &fe), tol8, irr));
    out.push(Check::conditional("ef_eq_ee2e", "e f = e e₂ e / tr(e)", rel(&ef, &ee2e), tol8, irr));
    if tw.depth >= 3 {
        let bi = classify(fr, 2, &ef);
        let ok = matches!(bi.as_ref().map(|b| b.kind), Ok(BiKind::Biprojection));
        let c = Check::flag("ef_biprojection", "e f is a biprojection at level 2", ok);
        out.push(if ok || irr { c } else { Check::with_status(&c.name, &c.paper_ref, crate::Status::HypothesisNotMet, None, 0.0) });
        if let Ok(fef) = fr.fourier(2, &ef) {
            let tf = tw.tr(f).re;
            let target = f.matmul(tw.e(3)).matmul(f).scale_re(1.0 / tf);
            // F₂(ef) is proportional to f e₃ f / tr(f); compare directions
            let s = fef.fro_norm() / target.fro_norm().max(1e-300);
            out.push(Check::conditional("F2_ef", "F₂(e f) ∝ f e₃ f / tr(f)", rel(&fef, &target.scale_re(s)), tol8, irr));
        }
    } else {
        out.push(Check::undefined("ef_biprojection", "e f is a biprojection at level 2 (needs A₃)"));
    }
    Ok(out)
}

/// P = span(A e A) ⊂ A₁ from a biprojection e, with its certificate.
pub fn intermediate_from_biprojection(fr: &Fourier, e: &BiElement) -> Result<(Algebra, Vec<Check>)> {
    let (_, f) = require_biprojection(e)?;
    let tw = fr.tower;
    if tw.depth < 2 {
        return Err(Error::DepthLimit { requested: 2, limit: tw.depth });
    }
    let irr = irreducible(tw);
    let a = tw.level_algebra(0);
    let mut words = Vec::new();
    for x in a.basis() {
        let xe = x.matmul(&e.value);
        for y in a.basis() {
            words.push(xe.matmul(y));
        }
    }
    let basis = orthonormalize(&words, tw.ip());
    let p = Algebra::from_parts(tw.ambient(), tw.ip().clone(), basis, words, None);
    let a1 = tw.level_algebra(1);
    let mut out = Vec::new();
    out.push(Check::identity("P_contains_A", "A ⊆ P", a.nesting_residual(&p), tol::SUBSPACE));
    out.push(Check::identity("P_in_A1", "P ⊆ A₁", p.nesting_residual(&a1), tol::SUBSPACE));
    out.push(Check::identity("P_closed", "A e A is an algebra", p.closure_residual(), tol::SUBSPACE));
    let fcomm = commutant_basis(std::slice::from_ref(f), &a1);
    let fa = Algebra::from_parts(tw.ambient(), tw.ip().clone(), fcomm, Vec::new(), None);
    out.push(Check::conditional("P_eq_f_commutant", "P = {[F(e)]}′∩A₁", p.subspace_distance(&fa), tol::SUBSPACE, irr));
    // e_P from a quasi-basis of the trace-preserving E^P_A
    let (ep, _) = tw.intermediate_jones(1, p.basis())?;
    out.push(Check::conditional("f_eq_eP", "[F(e)] = e_P", rel(f, &ep), tol::SUBSPACE, irr));
    let ind_top = jones_index_of(tw, &p, 1)?;
    let trf = tw.tr(f).re;
    out.push(Check::conditional(
        "index_A1_P",
        "∥[A₁:P]₀∥ = tr([F(e)])⁻¹",
        (ind_top.0 - 1.0 / trf).abs() / ind_top.0.max(1e-300),
        tol::INDEX,
        irr && ind_top.1,
    ));
    Ok((p, out))
}

/// ∥Ind∥ of the trace-preserving expectation A_k → X for an intermediate A_{k−1} ⊆ X ⊆ A_k,
/// and whether the index is scalar.
pub fn jones_index_of(tw: &Tower, x: &Algebra, k: isize) -> Result<(f64, bool)> {
    let onb = x.basis().to_vec();
    let ip = tw.ip().clone();
    let f = move |y: &CMatrix| project(&onb, &ip, y);
    let top = tw.level(k);
    let qb = module_basis(&f, &top.basis)?;
    let ind = watatani_index(&qb, tw.ambient());
    Ok(index_summary(&ind, tw))
}

/// (∥Ind∥, scalar?) restricted to the identity of the tower.
fn index_summary(ind: &CMatrix, tw: &Tower) -> (f64, bool) {
    let n = tw.ambient();
    let s = tw.tr(ind).re;
    let scalar = rel(ind, &CMatrix::identity(n).scale_re(s)) <= tol::INDEX;
    (ind.op_norm(), scalar)
}

/// An intermediate B ⊆ C ⊆ A carried into the tower with its Jones projections.
#[derive(Clone, Debug)]
pub struct Intermediate {
    pub label: String,
    /// C in the top ambient, basis orthonormal for the tower trace.
    pub alg: Algebra,
    /// e_C ∈ A₁.
    pub e: CMatrix,
    /// Quasi-basis of E^C_B with e_C = Σ γ e₁ γ*.
    pub gamma: Vec<CMatrix>,
    /// ∥[C:B]₀∥ and ∥[A:C]₀∥, with scalarity flags.
    pub index_cb: (f64, bool),
    pub index_ac: (f64, bool),
    /// C₁ = span(A e_C A) ⊂ A₁ and e_{C₁} ∈ A₂ (depth ≥ 2).
    pub c1: Option<Algebra>,
    pub e1: Option<CMatrix>,
    /// e_{C₂} ∈ A₃ (depth ≥ 3).
    pub e2: Option<CMatrix>,
}

impl Intermediate {
    /// `alg` lives in the model ambient.
    pub fn new(tw: &Tower, label: &str, alg: &Algebra) -> Result<Intermediate> {
        let c = tw.embed_algebra(alg);
        Self::in_tower(tw, label, c)
    }

    /// `c` already lives in the top ambient.
    pub fn in_tower(tw: &Tower, label: &str, c: Algebra) -> Result<Intermediate> {
        let b = tw.level_algebra(-1);
        let a = tw.level_algebra(0);
        let nb = b.nesting_residual(&c);
        let na = c.nesting_residual(&a);
        if nb > tol::SUBSPACE || na > tol::SUBSPACE {
            return Err(Error::NotNested(nb.max(na)));
        }
        let (e, gamma) = tw.intermediate_jones(0, c.basis())?;
        let n = tw.ambient();
        let index_cb = index_summary(&watatani_index(&gamma, n), tw);
        let index_ac = jones_index_of(tw, &c, 0)?;
        let mut out = Intermediate { label: label.into(), alg: c, e, gamma, index_cb, index_ac, c1: None, e1: None, e2: None };
        if tw.depth >= 2 {
            let mut span = vec![CMatrix::identity(n)];
            span.extend(a.basis().iter().map(|x| x.matmul(&out.e)));
            let mut words = Vec::new();
            for x in a.basis() {
                let xe = x.matmul(&out.e);
                for y in a.basis() {
                    words.push(xe.matmul(y));
                }
            }
            let basis = orthonormalize(&words, tw.ip());
            let mut gens = a.generators().to_vec();
            gens.push(out.e.clone());
            out.c1 = Some(Algebra::from_parts(n, tw.ip().clone(), basis, gens, None));
            let (e1, _) = tw.intermediate_jones(1, &span)?;
            out.e1 = Some(e1);
        }
        if tw.depth >= 3 {
            let e1 = out.e1.as_ref().expect("depth ≥ 2");
            let a1 = tw.level(1);
            let mut span = vec![CMatrix::identity(n)];
            span.extend(a1.basis.iter().map(|x| x.matmul(e1)));
            let (e2, _) = tw.intermediate_jones(2, &span)?;
            out.e2 = Some(e2);
        }
        Ok(out)
    }

    /// Both legs have scalar index.
    pub fn scalar_legs(&self) -> bool {
        self.index_cb.1 && self.index_ac.1
    }

    /// E^A_C in the top ambient (trace-preserving).
    pub fn expect(&self, tw: &Tower, x: &CMatrix) -> CMatrix {
        project(self.alg.basis(), tw.ip(), x)
    }
}

/// Relation suite for e_C of an intermediate.
pub fn jones_relations(fr: &Fourier, c: &Intermediate) -> Vec<Check> {
    let tw = fr.tower;
    let hyp = c.scalar_legs();
    let tol8 = tol::PROJECTION;
    let ec = &c.e;
    let e1 = tw.e(1);
    let ind_ab = tw.index;
    let (cb, ac) = (c.index_cb.0, c.index_ac.0);
    let mut out = Vec::new();
    out.push(Check::identity("eC_projection", "e_C is a projection", projection_residual(ec), tol8));
    // e_C x e_C = E^A_C(x) e_C on A, checked against the orthogonal projection onto C
    let mut imp: f64 = 0.0;
    for x in tw.level(0).basis.iter() {
        let lhs = ec.matmul(x).matmul(ec);
        let rhs = c.expect(tw, x).matmul(ec);
        imp = imp.max((&lhs - &rhs).fro_norm() / (x.fro_norm() * ec.fro_norm()).max(1e-300));
    }
    out.push(Check::identity("eC_implements", "e_C x e_C = E^A_C(x) e_C", imp, tol8));
    let r = rel(&ec.matmul(e1), e1).max(rel(&e1.matmul(ec), e1));
    out.push(Check::identity("eC_e1", "e_C e₁ = e₁ e_C = e₁", r, tol8));
    out.push(Check::identity("eC_commutes_B", "e_C ∈ B′∩A₁", tw.commutant_residual(1, Of::B, ec), tol::SUBSPACE));
    let trc = tw.tr(ec).re;
    out.push(Check::conditional("tr_eC", "tr(e_C) = [A:C]₀⁻¹", (trc - 1.0 / ac).abs() * ac, tol::INDEX, hyp));
    out.push(Check::conditional(
        "index_multiplicative",
        "[A:B]₀ = [A:C]₀ [C:B]₀",
        (ind_ab - ac * cb).abs() / ind_ab,
        tol::INDEX,
        hyp,
    ));
    if tw.depth < 2 {
        out.push(Check::undefined("gamma0_eC", "γ₀(e_C) = e_C (needs A₂)"));
        return out;
    }
    match fr.gamma0(ec) {
        Ok(g) => out.push(Check::identity("gamma0_eC", "γ₀(e_C) = e_C", rel(&g, ec), tol8)),
        Err(e) => out.push(Check::with_status("gamma0_eC", &format!("γ₀(e_C) = e_C: {e}"), crate::Status::Fail, None, tol8)),
    }
    let c1 = c.c1.as_ref().expect("depth ≥ 2");
    let ec1 = c.e1.as_ref().expect("depth ≥ 2");
    let proj_e1 = project(c1.basis(), tw.ip(), e1);
    out.push(Check::conditional("E_C1_e1", "E^{A₁}_{C₁}(e₁) = [C:B]₀⁻¹ e_C", rel(&proj_e1, &ec.scale_re(1.0 / cb)), tol8, hyp));
    let lhs = ec.matmul(tw.e(2)).matmul(ec);
    let rhs = ec.matmul(ec1).scale_re(1.0 / ac);
    out.push(Check::conditional("eC_e2_eC", "e_C e₂ e_C = [A:C]₀⁻¹ e_C e_{C₁}", rel(&lhs, &rhs), tol8, hyp));
    match fr.fourier(1, ec) {
        Ok(f) => {
            let target = ec1.scale_re(ind_ab.sqrt() / ac);
            out.push(Check::conditional("F1_eC", "F₁(e_C) = [A:B]₀^{1/2} [A:C]₀⁻¹ e_{C₁}", rel(&f, &target), tol8, hyp));
        }
        Err(e) => out.push(Check::with_status("F1_eC", &format!("F₁(e_C): {e}"), crate::Status::Fail, None, tol8)),
    }
    match classify(fr, 1, ec) {
        Ok(b) => {
            let want = ind_ab.sqrt() / ac;
            let res = match (b.kind, b.t) {
                (BiKind::Biprojection, Some(t)) => (t - want).abs() / want,
                _ => f64::INFINITY,
            };
            out.push(Check::conditional("eC_biprojection", "e_C is a biprojection with t = [A:B]₀^{1/2}/[A:C]₀", res, tol::INDEX, hyp));
        }
        Err(e) => out.push(Check::with_status("eC_biprojection", &format!("classification failed: {e}"), crate::Status::Fail, None, 0.0)),
    }
    // γ₀(B′∩C₁) = C′∩A₁
    let bc1 = commutant_basis(&tw.level(-1).gens, c1);
    let imgs: Vec<CMatrix> = bc1.iter().filter_map(|x| fr.gamma0(x).ok()).collect();
    if imgs.len() == bc1.len() {
        let img = Algebra::from_parts(tw.ambient(), tw.ip().clone(), orthonormalize(&imgs, tw.ip()), Vec::new(), None);
        let ca1 = commutant_basis(c.alg.generators(), &tw.level_algebra(1));
        let ca1 = Algebra::from_parts(tw.ambient(), tw.ip().clone(), ca1, Vec::new(), None);
        out.push(Check::conditional("gamma0_swap", "γ₀(B′∩C₁) = C′∩A₁", img.subspace_distance(&ca1), tol::SUBSPACE, hyp));
    }
    if let Some(ec2) = &c.e2 {
        match fr.shift(ec) {
            Ok(s) => out.push(Check::conditional("shift_eC", "γ₁γ₀(e_C) = e_{C₂}", rel(&s, ec2), tol8, hyp)),
            Err(e) => out.push(Check::with_status("shift_eC", &format!("γ₁γ₀(e_C): {e}"), crate::Status::Fail, None, tol8)),
        }
    } else {
        out.push(Check::undefined("shift_eC", "γ₁γ₀(e_C) = e_{C₂} (needs A₃)"));
    }
    out
}

/// {e₁}′∩A = B.
pub fn e1_commutant_is_b(tw: &Tower) -> Check {
    let a = tw.level_algebra(0);
    let basis = commutant_basis(std::slice::from_ref(tw.e(1)), &a);
    let x = Algebra::from_parts(tw.ambient(), tw.ip().clone(), basis, Vec::new(), None);
    Check::identity("e1_commutant", "{e₁}′∩A = B", x.subspace_distance(&tw.level_algebra(-1)), tol::SUBSPACE)
}

/// Σ δ e_B δ* = e_D for a second, independently built quasi-basis δ of E^D_B.
pub fn intermediate_basis_identity(tw: &Tower, d: &Intermediate) -> Result<f64> {
    // reverse the spanning order to get a different quasi-basis
    let mut span: Vec<CMatrix> = d.alg.basis().to_vec();
    span.reverse();
    let b = tw.level_algebra(-1);
    let bb = b.basis().to_vec();
    let ip = tw.ip().clone();
    let f = move |y: &CMatrix| project(&bb, &ip, y);
    let delta = module_basis(&f, &span)?;
    let mut s = CMatrix::zeros(tw.ambient(), tw.ambient());
    for g in &delta {
        s += &g.matmul(tw.e(1)).matmul(&g.adjoint());
    }
    Ok(rel(&s, &d.e))
}

/// Intermediate generated by B and a set of extra elements (model ambient).
pub fn generated(b: &Algebra, extra: &[CMatrix]) -> Algebra {
    let mut gens = b.generators().to_vec();
    gens.extend(extra.iter().cloned());
    span_closure_ip(&gens, b.ip().clone())
}
