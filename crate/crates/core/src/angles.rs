//! Interior and exterior angles between intermediates, the operators p(C,D) and q(C,D),
//! commuting squares and the rigidity bound for minimal intermediates.

use crate::biproj::{irreducible, Intermediate};
use crate::expect::module_basis;
use crate::fourier::Fourier;
use crate::numkernel::{projection_join, projection_meet, project, support_projection, CMatrix};
use crate::report::{Check, Status};
use crate::tower::{rel, Tower};
use crate::{tol, Error, Result};
use std::f64::consts::PI;

/// A quadruple B ⊆ C, D ⊆ A inside a tower.
pub struct Quadruple<'a> {
    pub tower: &'a Tower,
    pub c: &'a Intermediate,
    pub d: &'a Intermediate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleReport {
    pub cos: f64,
    pub angle: f64,
    pub method: &'static str,
    /// (tr(e_Ce_D) − τ)/√(tr e_C − τ)(tr e_D − τ), meaningful when B′∩A = ℂ.
    pub trace_formula: Option<f64>,
}

/// cos of the angle between e_C − e_B and e_D − e_B in the Hilbert A_k-module A_{k+1}:
/// ∥Ẽ(x*y)∥ / (∥Ẽ(x*x)∥^{1/2} ∥Ẽ(y*y)∥^{1/2}).
pub fn module_cos(tw: &Tower, k: isize, ec: &CMatrix, ed: &CMatrix, eb: &CMatrix) -> Result<f64> {
    let x = ec - eb;
    let y = ed - eb;
    let nx = tw.proj(k, &x.adj_mul(&x)).op_norm().sqrt();
    let ny = tw.proj(k, &y.adj_mul(&y)).op_norm().sqrt();
    let scale = eb.fro_norm().max(1.0);
    if nx <= 1e-7 * scale || ny <= 1e-7 * scale {
        return Err(Error::DegenerateLeg("a leg coincides with the bottom algebra".into()));
    }
    let c = tw.proj(k, &x.adj_mul(&y)).op_norm() / (nx * ny);
    if !(-1e-10..=1.0 + 1e-10).contains(&c) {
        return Err(Error::RepresentationFailure(format!("cosine {c} outside [0, 1]")));
    }
    Ok(c.clamp(0.0, 1.0))
}

fn trace_cos(tw: &Tower, ec: &CMatrix, ed: &CMatrix, tau: f64) -> Option<f64> {
    let a = tw.tr(ec).re - tau;
    let b = tw.tr(ed).re - tau;
    if a <= 1e-12 || b <= 1e-12 {
        return None;
    }
    Some((tw.tr(&ec.matmul(ed)).re - tau) / (a * b).sqrt())
}

fn report(cos: f64, trace_formula: Option<f64>) -> AngleReport {
    AngleReport { cos, angle: cos.acos(), method: "module_inner_product", trace_formula }
}

impl<'a> Quadruple<'a> {
    pub fn new(tower: &'a Tower, c: &'a Intermediate, d: &'a Intermediate) -> Self {
        Quadruple { tower, c, d }
    }

    /// r = [C:B]₀ / [A:D]₀.
    pub fn r(&self) -> f64 {
        self.c.index_cb.0 / self.d.index_ac.0
    }

    pub fn scalar(&self) -> bool {
        self.c.scalar_legs() && self.d.scalar_legs()
    }

    /// Interior angle α^B_A(C, D).
    pub fn interior(&self) -> Result<AngleReport> {
        let tw = self.tower;
        let c = module_cos(tw, 0, &self.c.e, &self.d.e, tw.e(1))?;
        Ok(report(c, trace_cos(tw, &self.c.e, &self.d.e, tw.tau)))
    }

    /// Exterior angle β^B_A(C, D) = α of the dual quadruple (A, C₁, D₁, A₁).
    pub fn exterior(&self) -> Result<AngleReport> {
        let tw = self.tower;
        let (Some(ec1), Some(ed1)) = (&self.c.e1, &self.d.e1) else {
            return Err(Error::DepthLimit { requested: 2, limit: tw.depth });
        };
        let c = module_cos(tw, 1, ec1, ed1, tw.e(2))?;
        Ok(report(c, trace_cos(tw, ec1, ed1, tw.tau)))
    }

    /// β^A_{A₁}(C₁, D₁): the interior angle of (A₁, C₂, D₂, A₂).
    pub fn dual_exterior(&self) -> Result<AngleReport> {
        let tw = self.tower;
        let (Some(ec2), Some(ed2)) = (&self.c.e2, &self.d.e2) else {
            return Err(Error::DepthLimit { requested: 3, limit: tw.depth });
        };
        let c = module_cos(tw, 2, ec2, ed2, tw.e(3))?;
        Ok(report(c, trace_cos(tw, ec2, ed2, tw.tau)))
    }

    /// cos α − [r √([A:C]−1)√([A:D]−1) cos β + (r − 1)] / (√([C:B]−1)√([D:B]−1)).
    pub fn alpha_beta_residual(&self) -> Result<f64> {
        let (cb, db) = (self.c.index_cb.0, self.d.index_cb.0);
        let (ac, ad) = (self.c.index_ac.0, self.d.index_ac.0);
        let den = ((cb - 1.0) * (db - 1.0)).sqrt();
        if den <= tol::INDEX || ac - 1.0 <= tol::INDEX || ad - 1.0 <= tol::INDEX {
            return Err(Error::DegenerateLeg("an index equals 1".into()));
        }
        let a = self.interior()?.cos;
        let b = self.exterior()?.cos;
        let r = self.r();
        let rhs = (r * ((ac - 1.0) * (ad - 1.0)).sqrt() * b + (r - 1.0)) / den;
        Ok((a - rhs).abs())
    }

    /// ∥E_C E_D − E_B∥ on A and ∥E_{C₁} E_{D₁} − E_A∥ on A₁.
    pub fn commuting_residuals(&self) -> (f64, Option<f64>) {
        let tw = self.tower;
        let ip = tw.ip();
        let b = tw.level(-1).basis.clone();
        let mut primal: f64 = 0.0;
        for x in &tw.level(0).basis {
            let y = self.c.expect(tw, &self.d.expect(tw, x));
            let z = project(&b, ip, x);
            primal = primal.max(ip.norm(&(&y - &z)) / ip.norm(x));
        }
        let dual = match (&self.c.c1, &self.d.c1) {
            (Some(c1), Some(d1)) => {
                let a = &tw.level(0).basis;
                let mut worst: f64 = 0.0;
                for x in &tw.level(1).basis {
                    let y = project(c1.basis(), ip, &project(d1.basis(), ip, x));
                    let z = project(a, ip, x);
                    worst = worst.max(ip.norm(&(&y - &z)) / ip.norm(x));
                }
                Some(worst)
            }
            _ => None,
        };
        (primal, dual)
    }

    /// p(C,D) = Σ γᵢ δⱼ e_B δⱼ* γᵢ* from the given quasi-bases.
    fn p_from(&self, gamma: &[CMatrix], delta: &[CMatrix]) -> CMatrix {
        let tw = self.tower;
        let mut out = CMatrix::zeros(tw.ambient(), tw.ambient());
        for g in gamma {
            for d in delta {
                let gd = g.matmul(d);
                out += &gd.matmul(tw.e(1)).matmul(&gd.adjoint());
            }
        }
        out
    }

    pub fn p(&self) -> CMatrix {
        self.p_from(&self.c.gamma, &self.d.gamma)
    }

    pub fn q(&self) -> CMatrix {
        self.p_from(&self.d.gamma, &self.c.gamma)
    }

    /// t = [A:B]₀ tr(e_C e_D).
    pub fn t(&self) -> f64 {
        let tw = self.tower;
        tw.index * tw.tr(&self.c.e.matmul(&self.d.e)).re
    }
}

/// A second quasi-basis for E^X_B, built from the reversed spanning set.
fn other_basis(tw: &Tower, x: &Intermediate) -> Result<Vec<CMatrix>> {
    let mut span: Vec<CMatrix> = x.alg.basis().to_vec();
    span.reverse();
    let bb = tw.level(-1).basis.clone();
    let ip = tw.ip().clone();
    let f = move |y: &CMatrix| project(&bb, &ip, y);
    module_basis(&f, &span)
}

fn status_check(name: &str, statement: &str, r: Result<f64>, tolerance: f64, hyp: bool) -> Check {
    match r {
        Ok(v) => Check::conditional(name, statement, v, tolerance, hyp),
        Err(Error::DepthLimit { .. }) => Check::undefined(name, &format!("{statement} (tower too shallow)")),
        Err(Error::DegenerateLeg(_)) => Check::undefined(name, &format!("{statement} (degenerate leg)")),
        Err(e) => Check::with_status(name, &format!("{statement}: {e}"), Status::Fail, None, tolerance),
    }
}

/// Angle checks for one quadruple.
pub fn angle_suite(fr: &Fourier, q: &Quadruple) -> Vec<Check> {
    let tw = fr.tower;
    let irr = irreducible(tw);
    let scalar = q.scalar();
    let mut out = Vec::new();
    let a = q.interior();
    let b = q.exterior();
    let swapped = Quadruple::new(tw, q.d, q.c);
    out.push(status_check(
        "alpha_symmetric",
        "α(C,D) = α(D,C)",
        a.clone().and_then(|x| swapped.interior().map(|y| (x.cos - y.cos).abs())),
        1e-10,
        true,
    ));
    out.push(status_check(
        "beta_symmetric",
        "β(C,D) = β(D,C)",
        b.clone().and_then(|x| swapped.exterior().map(|y| (x.cos - y.cos).abs())),
        1e-10,
        true,
    ));
    if let Ok(x) = &a {
        if let Some(tf) = x.trace_formula {
            out.push(Check::conditional("alpha_trace_formula", "module and trace formulas for cos α agree", (tf - x.cos).abs(), 1e-7, irr));
        }
        let same = q.c.alg.subspace_distance(&q.d.alg) <= tol::SUBSPACE;
        if same {
            out.push(Check::identity("alpha_equal_legs", "C = D gives α = 0", x.cos - 1.0, 1e-7));
        } else {
            let c = Check::flag("alpha_zero_iff_equal", "α(C,D) = 0 only if C = D", (1.0 - x.cos) > 1e-7);
            out.push(if c.status == Status::Pass || irr { c } else { Check::with_status(&c.name, &c.paper_ref, Status::HypothesisNotMet, None, 0.0) });
        }
    }
    out.push(status_check("alpha_beta_relation", "cos α = [r√([A:C]−1)√([A:D]−1) cos β + r − 1]/√([C:B]−1)√([D:B]−1)", q.alpha_beta_residual(), 1e-7, scalar));
    if (q.r() - 1.0).abs() <= tol::INDEX {
        out.push(status_check("parallelogram", "r = 1 gives α = β", a.clone().and_then(|x| b.clone().map(|y| (x.cos - y.cos).abs())), 1e-7, scalar));
    }
    out.push(status_check(
        "duality",
        "cos α^B_A(C,D) = cos β^A_{A₁}(C₁,D₁)",
        a.clone().and_then(|x| q.dual_exterior().map(|y| (x.cos - y.cos).abs())),
        1e-7,
        scalar,
    ));
    let (prim, dual) = q.commuting_residuals();
    if let Ok(x) = &a {
        let commuting = prim <= 1e-8;
        let right_angle = x.cos <= 1e-8;
        out.push(Check::flag("commuting_iff_right_angle", "commuting square ⇔ α = π/2", commuting == right_angle));
        if commuting {
            let (ac, ad) = (q.c.index_ac.0, q.d.index_ac.0);
            if let Ok(y) = &b {
                if ac > 1.0 + tol::INDEX && ad > 1.0 + tol::INDEX {
                    let want = (1.0 / q.r() - 1.0) / ((ac - 1.0) * (ad - 1.0)).sqrt();
                    out.push(Check::conditional("beta_commuting_formula", "α = π/2 gives cos β = (1/r − 1)/√([A:C]−1)√([A:D]−1)", (y.cos - want).abs(), 1e-7, scalar));
                }
            }
        }
    }
    let kind = square_kind(prim, dual);
    out.push(Check::with_status("square_kind", &format!("commuting-square classification: {kind}"), Status::Pass, Some(prim), 1e-8));
    out
}

/// commuting, cocommuting (dual quadruple commutes), both or neither.
pub fn square_kind(primal: f64, dual: Option<f64>) -> &'static str {
    match (primal <= 1e-8, dual.map(|d| d <= 1e-8)) {
        (true, Some(true)) => "both",
        (true, _) => "commuting",
        (false, Some(true)) => "cocommuting",
        _ => "neither",
    }
}

pub fn commuting_square_check(q: &Quadruple) -> &'static str {
    let (p, d) = q.commuting_residuals();
    square_kind(p, d)
}

/// p/q suite for one quadruple.
pub fn pq_suite(fr: &Fourier, q: &Quadruple) -> Vec<Check> {
    let tw = fr.tower;
    let hyp = q.scalar();
    let tol7 = 1e-7;
    let mut out = Vec::new();
    let p = q.p();
    let qq = q.q();
    let t = q.t();
    let n = tw.ambient();
    let indep = other_basis(tw, q.c).and_then(|g| other_basis(tw, q.d).map(|d| rel(&q.p_from(&g, &d), &p)));
    out.push(status_check("p_basis_independent", "p(C,D) does not depend on the quasi-bases", indep, 1e-8, true));
    // p ∈ C′∩D₁ and q ∈ D′∩C₁
    let comm = |x: &CMatrix, alg: &Intermediate| -> f64 {
        let nx = x.fro_norm().max(1e-300);
        alg.alg.generators().iter().map(|g| x.commutator(g).fro_norm() / (nx * g.fro_norm().max(1e-300))).fold(0.0, f64::max)
    };
    if let (Some(c1), Some(d1)) = (&q.c.c1, &q.d.c1) {
        out.push(Check::conditional("p_in_C_comm_D1", "p(C,D) ∈ C′∩D₁", comm(&p, q.c).max(d1.residual(&p)), tol7, hyp));
        out.push(Check::conditional("q_in_D_comm_C1", "q(C,D) ∈ D′∩C₁", comm(&qq, q.d).max(c1.residual(&qq)), tol7, hyp));
        let ed1 = project(d1.basis(), tw.ip(), &q.c.e).scale_re(q.d.index_cb.0);
        out.push(Check::conditional("p_expectation_form", "p = [D:B]₀ E^{A₁}_{D₁}(e_C)", rel(&p, &ed1), tol7, hyp));
    } else {
        out.push(Check::undefined("p_in_C_comm_D1", "p(C,D) ∈ C′∩D₁ (needs A₂)"));
    }
    match (fr.gamma0(&p), fr.gamma0(&qq)) {
        (Ok(gp), Ok(gq)) => {
            out.push(Check::conditional("gamma0_p", "γ₀(p) = q", rel(&gp, &qq), tol7, hyp));
            out.push(Check::conditional("gamma0_q", "γ₀(q) = p", rel(&gq, &p), tol7, hyp));
        }
        (Err(e), _) | (_, Err(e)) => out.push(status_check("gamma0_p", "γ₀(p) = q", Err(e), tol7, hyp)),
    }
    let pe = p.matmul(&q.d.e);
    out.push(Check::conditional("p_eD", "p e_D = t e_D", rel(&pe, &q.d.e.scale_re(t)), tol7, hyp));
    out.push(Check::conditional("q_eC", "q e_C = t e_C", rel(&qq.matmul(&q.c.e), &q.c.e.scale_re(t)), tol7, hyp));
    out.push(Check::conditional("p_squared", "p² = t p", rel(&p.matmul(&p), &p.scale_re(t)), tol7, hyp));
    out.push(Check::conditional("t_norm", "t = ∥p∥ = [A:B]₀ tr(e_C e_D)", (p.op_norm() - t).abs() / t.max(1e-300), tol7, hyp));
    let r = q.r();
    out.push(Check::conditional("tr_p", "tr(p) = r", (tw.tr(&p).re - r).abs() / r, tol7, hyp));
    out.push(Check::conditional("tr_q", "tr(q) = r", (tw.tr(&qq).re - r).abs() / r, tol7, hyp));
    match (support_projection(&p), projection_join(&q.c.e, &q.d.e)) {
        (Ok(s), Ok(j)) => {
            let gap = (&CMatrix::identity(n) - &s).matmul(&j).fro_norm() / j.fro_norm().max(1e-300);
            out.push(Check::conditional("support_p", "[p] ≥ e_C ∨ e_D", gap, tol7, hyp));
        }
        _ => out.push(Check::with_status("support_p", "[p] ≥ e_C ∨ e_D: eigensolver failure", Status::Fail, None, tol7)),
    }
    out
}

/// Pairwise angles of distinct minimal intermediates exceed π/3, with the chain of
/// trace inequalities behind it.
pub fn rigidity_check(fr: &Fourier, minimal: &[Intermediate]) -> Vec<Check> {
    let tw = fr.tower;
    let mut out = Vec::new();
    if minimal.len() < 2 {
        out.push(Check::flag("rigidity", "fewer than two minimal intermediates (vacuous)", true));
        return out;
    }
    for i in 0..minimal.len() {
        for j in i + 1..minimal.len() {
            let (c, d) = (&minimal[i], &minimal[j]);
            let hyp = c.scalar_legs() && d.scalar_legs();
            let q = Quadruple::new(tw, c, d);
            let tag = format!("{}|{}", c.label, d.label);
            match q.interior() {
                Ok(a) => {
                    let ok = a.angle > PI / 3.0;
                    let chk = Check::with_status(
                        &format!("rigidity[{tag}]"),
                        "interior angle between distinct minimal intermediates exceeds π/3",
                        if ok { Status::Pass } else if hyp { Status::Fail } else { Status::HypothesisNotMet },
                        Some(a.angle),
                        PI / 3.0,
                    );
                    out.push(chk);
                }
                Err(e) => out.push(status_check(&format!("rigidity[{tag}]"), "interior angle exceeds π/3", Err(e), 0.0, hyp)),
            }
            if let (Ok(j), Ok(m)) = (projection_join(&c.e, &d.e), projection_meet(&c.e, &d.e)) {
                let lhs = tw.tr(&j).re;
                let rhs = tw.tr(&c.e).re + tw.tr(&d.e).re - tw.tr(&m).re;
                out.push(Check::identity(&format!("join_trace[{tag}]"), "tr(e_C ∨ e_D) = tr e_C + tr e_D − tr(e_C ∧ e_D)", (lhs - rhs).abs(), 1e-8));
                if let Ok(s) = support_projection(&q.p()) {
                    let d = tw.tr(&s).re - lhs;
                    out.push(Check::conditional(&format!("support_trace[{tag}]"), "tr([p]) ≥ tr(e_C ∨ e_D)", (-d).max(0.0), 1e-8, hyp));
                }
            }
            let (cb, db) = (c.index_cb.0, d.index_cb.0);
            let den = ((cb - 1.0) * (db - 1.0)).sqrt();
            if den > tol::INDEX {
                let v = (q.t() - 1.0) / den;
                let chk = Check::with_status(
                    &format!("t_bound[{tag}]"),
                    "(t − 1)/√([C:B]₀−1)√([D:B]₀−1) < 1/2",
                    if v < 0.5 { Status::Pass } else if hyp { Status::Fail } else { Status::HypothesisNotMet },
                    Some(v),
                    0.5,
                );
                out.push(chk);
            }
        }
    }
    out
}
