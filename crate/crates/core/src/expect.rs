//! Traces, conditional expectations, quasi-bases, Watatani index and minimality.

use crate::numkernel::{herm_eig, nullspace, orthonormalize, psd_root_pinv, CMatrix, InnerProduct, C64, ONE, ZERO};
use crate::rng::{combination, complex_gaussian, seeded};
use crate::staralg::{relative_commutant, Algebra, BlockData, InclusionPair};
use crate::{tol, Error, Result};
use serde::Serialize;

/// Faithful tracial state given by the weights of minimal projections.
#[derive(Clone, Debug)]
pub struct TraceState {
    pub weights: Vec<f64>,
    pub density: CMatrix,
}

impl TraceState {
    /// Weights are rescaled so that Σ w_i d_i = 1.
    pub fn from_weights(blocks: &BlockData, weights: &[f64]) -> Result<Self> {
        if weights.len() != blocks.len() || weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::NotFaithful);
        }
        let total: f64 = weights.iter().zip(&blocks.dims).map(|(w, &d)| w * d as f64).sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let density = blocks.density(&weights);
        Ok(TraceState { weights, density })
    }

    /// Trace given directly by a central density (weights left empty).
    pub fn from_density(density: CMatrix) -> Self {
        TraceState { weights: Vec::new(), density }
    }

    /// Restriction of the normalized ambient trace.
    pub fn normalized_ambient(blocks: &BlockData) -> Self {
        let w: Vec<f64> = blocks.minimal.iter().map(|p| p.trace().re).collect();
        Self::from_weights(blocks, &w).expect("ambient trace is faithful")
    }

    pub fn eval(&self, x: &CMatrix) -> C64 {
        self.density.matmul(x).trace()
    }

    pub fn ip(&self) -> InnerProduct {
        InnerProduct::new(self.density.clone()).expect("density is Hermitian")
    }
}

/// Conditional expectation E(x) = Σ_j u_j Tr(w_j* x), with quasi-basis and index attached.
#[derive(Clone, Debug)]
pub struct CondExp {
    pub source: Algebra,
    pub target: Algebra,
    u: Vec<CMatrix>,
    w: Vec<CMatrix>,
    pub quasi_basis: Vec<CMatrix>,
    pub index: CMatrix,
}

impl CondExp {
    /// Build from a frame and attach a quasi-basis generated from the source basis.
    pub fn from_frame(source: Algebra, target: Algebra, u: Vec<CMatrix>, w: Vec<CMatrix>) -> Result<Self> {
        let n = source.ambient();
        let mut e = CondExp { source, target, u, w, quasi_basis: Vec::new(), index: CMatrix::zeros(n, n) };
        let span = e.source.basis().to_vec();
        e.quasi_basis = quasi_basis(&e, &span)?;
        e.index = watatani_index(&e.quasi_basis, n);
        Ok(e)
    }

    pub fn ambient(&self) -> usize {
        self.source.ambient()
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let n = x.rows();
        let mut out = CMatrix::zeros(n, n);
        for (u, w) in self.u.iter().zip(&self.w) {
            let s = w.fro_inner(x);
            if s != ZERO {
                out.axpy(s, u);
            }
        }
        out
    }

    /// x ↦ E(h^{1/2} x h^{1/2}).
    pub fn twisted(&self, h: &CMatrix) -> Result<CondExp> {
        let r = psd_root_pinv(h, 0.5)?;
        let w = self.w.iter().map(|w| r.matmul(w).matmul(&r)).collect();
        CondExp::from_frame(self.source.clone(), self.target.clone(), self.u.clone(), w)
    }

    /// `outer` ∘ `self`, where outer maps the target of self further down.
    pub fn then(&self, outer: &CondExp) -> Result<CondExp> {
        let mut w = Vec::with_capacity(outer.w.len());
        for wk in &outer.w {
            let n = wk.rows();
            let mut acc = CMatrix::zeros(n, n);
            for (uj, wj) in self.u.iter().zip(&self.w) {
                let s = wk.fro_inner(uj);
                if s != ZERO {
                    acc.axpy(s.conj(), wj);
                }
            }
            w.push(acc);
        }
        CondExp::from_frame(self.source.clone(), outer.target.clone(), outer.u.clone(), w)
    }

    pub fn index_norm(&self) -> f64 {
        self.index.op_norm()
    }

    /// Distance of Ind(E) from a scalar, relative to its norm.
    pub fn index_scalar_defect(&self) -> f64 {
        let n = self.ambient();
        let c = self.index.trace() / n as f64;
        (&self.index - &CMatrix::identity(n).scale(c)).op_norm() / self.index_norm().max(1e-300)
    }

    pub fn is_scalar_index(&self) -> bool {
        self.index_scalar_defect() <= tol::INDEX
    }

    /// max over source basis of the two quasi-basis reconstruction residuals.
    pub fn quasi_basis_residual(&self, qb: &[CMatrix]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in self.source.basis() {
            let nx = x.fro_norm().max(1e-300);
            let mut left = CMatrix::zeros(x.rows(), x.cols());
            let mut right = left.clone();
            for l in qb {
                left += &l.matmul(&self.apply(&l.adj_mul(x)));
                right += &self.apply(&x.matmul(l)).matmul(&l.adjoint());
            }
            worst = worst.max((&left - x).fro_norm() / nx).max((&right - x).fro_norm() / nx);
        }
        worst
    }

    /// Unital, idempotent onto B, B-bimodular: worst relative residual over the bases.
    pub fn expectation_residual(&self) -> f64 {
        let n = self.ambient();
        let id = CMatrix::identity(n);
        let mut worst = (&self.apply(&id) - &id).fro_norm() / (n as f64).sqrt();
        let bs = self.target.basis();
        for b in bs {
            worst = worst.max((&self.apply(b) - b).fro_norm() / b.fro_norm());
        }
        let xs: Vec<&CMatrix> = self.source.basis().iter().take(16).collect();
        for x in xs {
            let ex = self.apply(x);
            worst = worst.max(self.target.residual(&ex));
            for b in bs.iter().take(6) {
                let lhs = self.apply(&b.matmul(x));
                let rhs = b.matmul(&ex);
                let lhs2 = self.apply(&x.matmul(b));
                let rhs2 = ex.matmul(b);
                let s = b.fro_norm() * x.fro_norm();
                worst = worst.max((&lhs - &rhs).fro_norm() / s).max((&lhs2 - &rhs2).fro_norm() / s);
            }
        }
        worst
    }

    /// Most negative eigenvalue (relative) of E(x*x) and of E(x*x) − E(x)*E(x) over a seeded battery.
    pub fn positivity_defects(&self, seed: u64, samples: usize) -> (f64, f64) {
        let mut r = seeded(seed);
        let mut pos: f64 = 0.0;
        let mut ks: f64 = 0.0;
        for _ in 0..samples {
            let x = combination(&mut r, self.source.basis());
            let xx = x.adj_mul(&x);
            let exx = self.apply(&xx).hermitian_part();
            let ex = self.apply(&x);
            let scale = xx.op_norm().max(1e-300);
            let l1 = herm_eig(&exx).map(|e| e.values[0]).unwrap_or(f64::NEG_INFINITY);
            let l2 = herm_eig(&(&exx - &ex.adj_mul(&ex)).hermitian_part()).map(|e| e.values[0]).unwrap_or(f64::NEG_INFINITY);
            pos = pos.min(l1 / scale);
            ks = ks.min(l2 / scale);
        }
        (-pos, -ks)
    }
}

/// E onto B that preserves the trace: the orthogonal projection under ⟨x,y⟩ = tr(x*y).
pub fn trace_preserving_expectation(pair: &InclusionPair, tr: &TraceState) -> Result<CondExp> {
    tp_expectation(&pair.big, &pair.small, tr)
}

pub fn tp_expectation(a: &Algebra, b: &Algebra, tr: &TraceState) -> Result<CondExp> {
    if tr.weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::NotFaithful);
    }
    let ip = tr.ip();
    let onb = orthonormalize(b.basis(), &ip);
    let w = onb.iter().map(|x| x.matmul(&tr.density)).collect();
    let src = a.with_ip(ip.clone());
    let tgt = b.with_ip(ip);
    CondExp::from_frame(src, tgt, onb, w)
}

/// E(x) = φ(x)·1 for a state with density σ (B = ℂ).
pub fn state_expectation(a: &Algebra, sigma: &CMatrix) -> Result<CondExp> {
    let n = a.ambient();
    CondExp::from_frame(a.clone(), Algebra::scalars(n), vec![CMatrix::identity(n)], vec![sigma.clone()])
}

/// Module Gram–Schmidt over B: quasi-basis spanning the right B-module generated by `span`.
pub fn quasi_basis(e: &CondExp, span: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let f = |x: &CMatrix| e.apply(x);
    let qb = module_basis(&f, span)?;
    if e.quasi_basis_residual(&qb) > tol::QUASI_BASIS {
        let mut all = span.to_vec();
        all.extend(e.source.basis().iter().cloned());
        return module_basis(&f, &all);
    }
    Ok(qb)
}

/// Pimsner–Popa Gram–Schmidt for an arbitrary faithful expectation given as a closure.
/// Each accepted element m satisfies E(m*m) = support projection.
pub fn module_basis(e: &dyn Fn(&CMatrix) -> CMatrix, span: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let mut qb: Vec<CMatrix> = Vec::new();
    for x in span {
        let nx = x.fro_norm();
        if nx == 0.0 {
            continue;
        }
        let mut r = x.clone();
        for _ in 0..2 {
            for m in qb.iter() {
                let c = e(&m.adj_mul(&r));
                r -= &m.matmul(&c);
            }
        }
        if r.fro_norm() <= 1e-9 * nx {
            continue;
        }
        let g = e(&r.adj_mul(&r)).hermitian_part();
        let s = psd_root_pinv(&g, -0.5)?;
        let m = r.matmul(&s);
        if m.fro_norm() > 1e-12 {
            qb.push(m);
        }
    }
    Ok(qb)
}

/// Ind(E) = Σ λ λ*.
pub fn watatani_index(qb: &[CMatrix], n: usize) -> CMatrix {
    let mut ind = CMatrix::zeros(n, n);
    for l in qb {
        ind += &l.matmul(&l.adjoint());
    }
    ind
}

/// Index from a second quasi-basis (seeded random spanning set); returns (index, relative difference).
pub fn index_second_basis(e: &CondExp, seed: u64) -> Result<(CMatrix, f64)> {
    let mut r = seeded(seed);
    let mut span: Vec<CMatrix> = e.source.basis().iter().rev().cloned().collect();
    for s in span.iter_mut() {
        let mix = combination(&mut r, e.source.basis()).scale_re(0.1);
        *s = &s.scale(complex_gaussian(&mut r) + ONE * 2.0) + &mix;
    }
    let qb = quasi_basis(e, &span)?;
    let ind = watatani_index(&qb, e.ambient());
    let diff = (&ind - &e.index).op_norm() / e.index_norm().max(1e-300);
    Ok((ind, diff))
}

/// Centrality residual of the index.
pub fn index_central_residual(e: &CondExp) -> f64 {
    let s = e.index_norm().max(1e-300);
    e.source.generators().iter().map(|a| e.index.commutator(a).fro_norm() / (s * a.fro_norm().max(1e-300))).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct PpEstimate {
    pub c: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Sampled Pimsner–Popa constant: min over rank-one positives P of sup{c : E(P) ≥ cP}.
pub fn pp_constant(e: &CondExp, seed: u64, samples: usize) -> Result<PpEstimate> {
    let blocks = e.source.block_data()?;
    let mut r = seeded(seed);
    let score = |a: &CMatrix, p: &CMatrix| -> Option<f64> {
        let pp = a.matmul(p).matmul(&a.adjoint()).hermitian_part();
        let s = pp.op_norm();
        // a nearly annihilating p gives a ratio dominated by rounding
        if s < 1e-8 * a.fro_norm().powi(2) {
            return None;
        }
        let pp = pp.scale_re(1.0 / s);
        let q = e.apply(&pp).hermitian_part();
        let qi = psd_root_pinv(&q, -0.5).ok()?;
        let m = qi.matmul(&pp).matmul(&qi).hermitian_part();
        let top = herm_eig(&m).ok()?.values.last().copied()?;
        (top > 0.0).then(|| 1.0 / top)
    };
    let mut best = f64::INFINITY;
    let mut best_a: Option<(CMatrix, usize)> = None;
    for k in 0..samples {
        let i = k % blocks.len();
        let a = combination(&mut r, e.source.basis());
        if let Some(c) = score(&a, &blocks.minimal[i]) {
            if c < best {
                best = c;
                best_a = Some((a, i));
            }
        }
    }
    // local refinement around the best sample
    if let Some((mut a, i)) = best_a {
        let mut step = 0.3;
        for _ in 0..200 {
            let trial = &a + &combination(&mut r, e.source.basis()).scale_re(step * a.fro_norm() / (e.source.dim() as f64).sqrt());
            match score(&trial, &blocks.minimal[i]) {
                Some(c) if c < best => {
                    best = c;
                    a = trial;
                }
                _ => step *= 0.9,
            }
            if step < 1e-6 {
                break;
            }
        }
    }
    Ok(PpEstimate { c: best, samples, seed })
}

/// H_E(x) = Σ λ x λ*.
pub fn h_map(e: &CondExp, x: &CMatrix) -> CMatrix {
    let n = x.rows();
    let mut out = CMatrix::zeros(n, n);
    for l in &e.quasi_basis {
        out += &l.matmul(x).matmul(&l.adjoint());
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityCertificate {
    pub minimal: bool,
    pub scalar_index: bool,
    pub c: f64,
    /// Is there a faithful central density whose trace E preserves?
    pub invariant_trace: bool,
    /// Relative residual of Ind(E) lying in B.
    pub index_in_target: f64,
    /// max ∥H_E(x) − Ind(E)·E_Z(x)∥ over a basis of B′∩A, E_Z the trace-preserving expectation onto Z(A).
    pub residual: f64,
    /// max ∥E(xy) − E(yx)∥ over B′∩A.
    pub tracial_residual: f64,
    /// max ∥H_E(x) − c·E(x)∥ when A and B are both simple, else None.
    pub scalar_form_residual: Option<f64>,
}

/// Runtime certificate of minimality.
pub fn minimality_check(e: &CondExp) -> Result<MinimalityCertificate> {
    let n = e.ambient();
    let ablocks = e.source.block_data()?;
    let bblocks = e.target.block_data()?;
    let c = e.index_norm();
    let fail = |scalar_index, invariant_trace, index_in_target| MinimalityCertificate {
        minimal: false,
        scalar_index,
        c,
        invariant_trace,
        index_in_target,
        residual: f64::INFINITY,
        tracial_residual: f64::INFINITY,
        scalar_form_residual: None,
    };
    let scalar_index = e.is_scalar_index();
    let index_in_target = e.target.residual(&e.index);
    // invariant central density: ρ = Σ c_i z_i with Tr(ρE(x)) = Tr(ρx)
    let k = ablocks.len();
    let xs = e.source.basis();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for x in xs {
        let d = &e.apply(x) - x;
        let row: Vec<C64> = ablocks.central.iter().map(|z| z.matmul(&d).trace()).collect();
        rows.push(row.iter().map(|v| v.re).collect());
        rows.push(row.iter().map(|v| v.im).collect());
    }
    let m = CMatrix::from_real(&rows);
    let scale = m.max_abs().max(1.0);
    let null = if m.max_abs() <= 1e-11 * scale {
        (0..k).map(|i| (0..k).map(|j| if i == j { ONE } else { ZERO }).collect()).collect()
    } else {
        nullspace(&m)?
    };
    let mut coef = vec![0.0; k];
    for v in &null {
        let s: C64 = v.iter().sum::<C64>();
        for i in 0..k {
            coef[i] += (v[i] * s.conj()).re;
        }
    }
    let positive = !null.is_empty() && coef.iter().all(|&x| x > 1e-9 * coef.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    if !positive {
        return Ok(fail(scalar_index, false, index_in_target));
    }
    let mut rho = CMatrix::zeros(n, n);
    for i in 0..k {
        rho.axpy(C64::new(coef[i], 0.0), &ablocks.central[i]);
    }
    let rho = rho.scale_re(1.0 / rho.trace().re);
    let ez = |x: &CMatrix| -> CMatrix {
        let mut out = CMatrix::zeros(n, n);
        for z in &ablocks.central {
            let num = rho.matmul(z).matmul(x).trace();
            let den = rho.matmul(z).trace();
            out.axpy(num / den, z);
        }
        out
    };
    let comm = relative_commutant(e.target.generators(), &e.source);
    let mut residual: f64 = 0.0;
    let mut tracial: f64 = 0.0;
    let mut literal: f64 = 0.0;
    let simple = ablocks.len() == 1 && bblocks.len() == 1;
    let cb = comm.basis();
    for x in cb {
        let nx = x.fro_norm().max(1e-300);
        let h = h_map(e, x);
        let target = e.index.matmul(&ez(x));
        residual = residual.max((&h - &target).fro_norm() / (nx * c));
        if simple {
            literal = literal.max((&h - &e.apply(x).scale_re(c)).fro_norm() / (nx * c));
        }
    }
    for x in cb {
        for y in cb {
            let d = &e.apply(&x.matmul(y)) - &e.apply(&y.matmul(x));
            tracial = tracial.max(d.fro_norm() / (x.fro_norm() * y.fro_norm()).max(1e-300));
        }
    }
    let minimal = index_in_target <= 1e-8 && residual <= 1e-8 && tracial <= 1e-8;
    Ok(MinimalityCertificate {
        minimal,
        scalar_index,
        c,
        invariant_trace: true,
        index_in_target,
        residual,
        tracial_residual: tracial,
        scalar_form_residual: simple.then_some(literal),
    })
}

/// Perron–Frobenius Markov weights: per connected component, s_A ∝ PF vector of ΛΛᵀ.
/// Component masses come from `canonical` (weights per A-block), else the ambient trace.
pub fn markov_weights(pair: &InclusionPair, canonical: Option<&[f64]>) -> Result<(Vec<f64>, Vec<f64>)> {
    let ab = pair.big_blocks();
    let default: Vec<f64> = ab.minimal.iter().map(|p| p.trace().re).collect();
    let canon = canonical.unwrap_or(&default);
    let na = ab.len();
    let mut s = vec![0.0; na];
    let mut beta = vec![0.0; na];
    let lam = &pair.lambda;
    for (ai, bi) in pair.components() {
        let k = ai.len();
        let mut llt = CMatrix::zeros(k, k);
        for (p, &i) in ai.iter().enumerate() {
            for (q, &i2) in ai.iter().enumerate() {
                let v: usize = bi.iter().map(|&j| lam[i][j] * lam[i2][j]).sum();
                llt[(p, q)] = C64::new(v as f64, 0.0);
            }
        }
        let eig = herm_eig(&llt)?;
        let b = eig.values[k - 1];
        let mut v: Vec<f64> = (0..k).map(|p| eig.vectors[(p, k - 1)].norm()).collect();
        let mass: f64 = ai.iter().map(|&i| canon[i] * ab.dims[i] as f64).sum();
        let cur: f64 = ai.iter().zip(&v).map(|(&i, x)| x * ab.dims[i] as f64).sum();
        for x in v.iter_mut() {
            *x *= mass / cur;
        }
        for (p, &i) in ai.iter().enumerate() {
            s[i] = v[p];
            beta[i] = b;
        }
    }
    Ok((s, beta))
}

/// The minimal conditional expectation, certified; falls back to numerical minimization.
pub fn minimal_expectation(pair: &InclusionPair, canonical: Option<&[f64]>, seed: u64) -> Result<(CondExp, MinimalityCertificate, TraceState)> {
    let (s, _) = markov_weights(pair, canonical)?;
    let tr = TraceState::from_weights(pair.big_blocks(), &s)?;
    let e = trace_preserving_expectation(pair, &tr)?;
    let cert = minimality_check(&e)?;
    if cert.minimal {
        return Ok((e, cert, tr));
    }
    let refined = minimize_index(&e, seed)?;
    let cert2 = minimality_check(&refined)?;
    if cert2.minimal {
        return Ok((refined, cert2, tr));
    }
    Err(Error::CertificateFailure(format!("residual {:.3e} after refinement", cert2.residual)))
}

/// Descend ∥Ind(E_h)∥ over positive h ∈ B′∩A with E(h) = 1.
pub fn minimize_index(e: &CondExp, seed: u64) -> Result<CondExp> {
    let comm = relative_commutant(e.target.generators(), &e.source);
    let herm: Vec<CMatrix> = comm.basis().iter().map(|x| x.hermitian_part()).filter(|x| x.fro_norm() > 1e-12).collect();
    let n = e.ambient();
    let mut r = seeded(seed);
    let normalize = |h: &CMatrix| -> Option<CMatrix> {
        // E_h is unital iff E(h) = 1; rescale by E(h)^{-1/2} on both sides when E(h) is central in B
        let eh = e.apply(h).hermitian_part();
        let s = psd_root_pinv(&eh, -0.5).ok()?;
        let h2 = s.matmul(h).matmul(&s).hermitian_part();
        let lo = herm_eig(&h2).ok()?.values[0];
        (lo > 1e-9).then_some(h2)
    };
    let mut h = CMatrix::identity(n);
    let mut best = e.clone();
    let mut val = e.index_norm();
    let mut step = 0.5;
    while step > 1e-10 {
        let dir = crate::rng::combination(&mut r, &herm).hermitian_part();
        let dn = dir.op_norm().max(1e-300);
        let cand = &h + &dir.scale_re(step / dn);
        let mut improved = false;
        if let Some(hc) = normalize(&cand) {
            if let Ok(ec) = e.twisted(&hc) {
                let v = ec.index_norm();
                if v < val - 1e-14 {
                    val = v;
                    best = ec;
                    h = hc;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.8;
        }
    }
    Ok(best)
}

/// True when x lies in {4cos²(π/m)} ∪ [4,∞) within eps (1 = 4cos²(π/3)).
pub fn in_index_set(x: f64, eps: f64) -> bool {
    if x >= 4.0 - eps {
        return true;
    }
    (3..=10_000).any(|m| {
        let v = 4.0 * (std::f64::consts::PI / m as f64).cos().powi(2);
        (v - x).abs() <= eps
    })
}
