//! Iterated basic construction B ⊂ A ⊂ A₁ ⊂ … ⊂ A_k with Jones projections and Markov traces.
//!
//! Each A_{k+1} is built directly in a minimal faithful representation: for every block j of
//! A_{k−1} with minimal projection p_j, the cyclic subspace A_k·p_j ⊂ L²(A_k, tr_k) carries an
//! irreducible representation of A_{k+1} = ⟨A_k, e_{k+1}⟩. Everything already built is
//! transported along, so all levels share the top ambient.

use crate::expect::{module_basis, tp_expectation, CondExp, TraceState};
use crate::numkernel::{orthonormalize, project, CMatrix, InnerProduct, C64, ZERO};
use crate::staralg::{commutant_basis, Algebra, BlockData, InclusionPair};
use crate::{tol, Error, Result};
use std::cell::OnceCell;

/// One compression step: the cyclic vectors spanning the new representation space.
#[derive(Clone, Debug)]
struct RepStep {
    w: Vec<Vec<CMatrix>>,
    ip: InnerProduct,
    offsets: Vec<usize>,
    n: usize,
}

impl RepStep {
    fn rep(&self, t: &dyn Fn(&CMatrix) -> CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        for (wj, &off) in self.w.iter().zip(&self.offsets) {
            let tw: Vec<CMatrix> = wj.iter().map(&t).collect();
            for (s, ws) in wj.iter().enumerate() {
                for (t, y) in tw.iter().enumerate() {
                    out[(off + s, off + t)] = self.ip.inner(ws, y);
                }
            }
        }
        out
    }

    fn left(&self, x: &CMatrix) -> CMatrix {
        self.rep(&|w: &CMatrix| x.matmul(w))
    }
}

/// A level of the tower inside the top ambient.
#[derive(Clone, Debug)]
pub struct Level {
    /// Orthonormal for the top Markov trace.
    pub basis: Vec<CMatrix>,
    pub gens: Vec<CMatrix>,
    pub blocks: BlockData,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Of {
    /// B′∩A_k
    B,
    /// A′∩A_k
    A,
}

#[derive(Debug)]
pub struct Tower {
    pub depth: usize,
    pub tau: f64,
    pub index: f64,
    n: usize,
    ip: InnerProduct,
    rho: CMatrix,
    levels: Vec<Level>,
    e: Vec<CMatrix>,
    lambda: Vec<CMatrix>,
    steps: Vec<RepStep>,
    model_ambient: usize,
    comm_b: Vec<OnceCell<Vec<CMatrix>>>,
    comm_a: Vec<OnceCell<Vec<CMatrix>>>,
}

impl Tower {
    /// Build to `depth` from a pair, its (minimal, trace-preserving) E₀ and the trace it preserves.
    pub fn build(pair: &InclusionPair, e0: &CondExp, tr: &TraceState, depth: usize) -> Result<Tower> {
        Self::build_with_limit(pair, e0, tr, depth, tol::MAX_DEPTH)
    }

    pub fn build_with_limit(pair: &InclusionPair, e0: &CondExp, tr: &TraceState, depth: usize, limit: usize) -> Result<Tower> {
        if depth > limit {
            return Err(Error::DepthLimit { requested: depth, limit });
        }
        if !e0.is_scalar_index() {
            return Err(Error::NotMarkov(e0.index_norm()));
        }
        let index = e0.index_norm();
        let n = pair.big.ambient();
        let ip = tr.ip();
        let mk = |alg: &Algebra| Level {
            basis: orthonormalize(alg.basis(), &ip),
            gens: alg.generators().to_vec(),
            blocks: alg.cached_blocks().cloned().expect("pair caches blocks"),
        };
        let levels = vec![mk(&pair.small), mk(&pair.big)];
        let mut t = Tower {
            depth: 0,
            tau: 1.0 / index,
            index,
            n,
            ip,
            rho: tr.density.clone(),
            levels,
            e: Vec::new(),
            lambda: e0.quasi_basis.clone(),
            steps: Vec::new(),
            model_ambient: n,
            comm_b: Vec::new(),
            comm_a: Vec::new(),
        };
        for _ in 0..depth {
            t.step()?;
        }
        t.comm_b = (0..=t.depth).map(|_| OnceCell::new()).collect();
        t.comm_a = (0..=t.depth).map(|_| OnceCell::new()).collect();
        Ok(t)
    }

    fn step(&mut self) -> Result<()> {
        let k = self.depth;
        let lower = &self.levels[k];
        let top = &self.levels[k + 1];
        let floor = 1e-9;
        let mut w = Vec::new();
        let mut sizes = Vec::new();
        let mut weights = Vec::new();
        for p in &lower.blocks.minimal {
            let vecs: Vec<CMatrix> = top.basis.iter().map(|a| a.matmul(p)).collect();
            let wj = crate::numkernel::orthonormalize_with_floor(&vecs, &self.ip, floor);
            sizes.push(wj.len());
            weights.push(self.tau * self.ip.functional(p).re);
            w.push(wj);
        }
        let n_new: usize = sizes.iter().sum();
        let mass: f64 = sizes.iter().zip(&weights).map(|(&d, &c)| d as f64 * c).sum();
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::NotMarkov(mass));
        }
        let mut offsets = Vec::new();
        let mut off = 0;
        for &d in &sizes {
            offsets.push(off);
            off += d;
        }
        let step = RepStep { w, ip: self.ip.clone(), offsets, n: n_new };
        // E_k: A_k → A_{k−1}, the trace-preserving projection, becomes e_{k+1}
        let lower_basis = lower.basis.clone();
        let ip_old = self.ip.clone();
        let e_new = step.rep(&|x: &CMatrix| project(&lower_basis, &ip_old, x));
        let left = |x: &CMatrix| step.left(x);
        let mut levels = Vec::new();
        for lv in &self.levels {
            let central: Vec<CMatrix> = lv.blocks.central.iter().map(left).collect();
            let mults = central.iter().zip(&lv.blocks.dims).map(|(z, &d)| (z.trace().re / d as f64).round() as usize).collect();
            levels.push(Level {
                basis: lv.basis.iter().map(left).collect(),
                gens: lv.gens.iter().map(left).collect(),
                blocks: BlockData { central, dims: lv.blocks.dims.clone(), mults, minimal: lv.blocks.minimal.iter().map(left).collect() },
            });
        }
        let mut e: Vec<CMatrix> = self.e.iter().map(left).collect();
        e.push(e_new.clone());
        let lambda = self.lambda.iter().map(left).collect();
        let mut diag = Vec::with_capacity(n_new);
        for (&d, &c) in sizes.iter().zip(&weights) {
            diag.extend(std::iter::repeat_n(c, d));
        }
        let rho = CMatrix::diag_real(&diag);
        let ip = InnerProduct::new(rho.clone())?;
        let full = Algebra::full_blocks(&sizes, ip.clone());
        let mut gens = levels[k + 1].gens.clone();
        gens.push(e_new);
        levels.push(Level { basis: full.basis().to_vec(), gens, blocks: BlockData::full(&sizes) });
        self.levels = levels;
        self.e = e;
        self.lambda = lambda;
        self.rho = rho;
        self.ip = ip;
        self.n = n_new;
        self.steps.push(step);
        self.depth += 1;
        Ok(())
    }

    pub fn ambient(&self) -> usize {
        self.n
    }
    pub fn density(&self) -> &CMatrix {
        &self.rho
    }
    pub fn ip(&self) -> &InnerProduct {
        &self.ip
    }
    /// Quasi-basis of E₀ in the top ambient.
    pub fn lambda(&self) -> &[CMatrix] {
        &self.lambda
    }

    /// Level A_k for k ≥ −1 (A_{−1} = B, A₀ = A).
    pub fn level(&self, k: isize) -> &Level {
        &self.levels[(k + 1) as usize]
    }

    pub fn level_algebra(&self, k: isize) -> Algebra {
        let lv = self.level(k);
        Algebra::from_parts(self.n, self.ip.clone(), lv.basis.clone(), lv.gens.clone(), Some(lv.blocks.clone()))
    }

    /// Jones projection e_j, j ≥ 1.
    pub fn e(&self, j: usize) -> &CMatrix {
        &self.e[j - 1]
    }

    /// e_{j_1} e_{j_2} ⋯ in the order given.
    pub fn e_word(&self, js: &[usize]) -> CMatrix {
        let mut acc = CMatrix::identity(self.n);
        for &j in js {
            acc = acc.matmul(self.e(j));
        }
        acc
    }

    /// e_a e_{a−1} ⋯ e_b for a ≥ b (or ascending if a < b).
    pub fn e_run(&self, a: usize, b: usize) -> CMatrix {
        let js: Vec<usize> = if a >= b { (b..=a).rev().collect() } else { (a..=b).collect() };
        self.e_word(&js)
    }

    pub fn tr(&self, x: &CMatrix) -> C64 {
        self.ip.functional(x)
    }

    /// Trace-preserving expectation onto A_k.
    pub fn proj(&self, k: isize, x: &CMatrix) -> CMatrix {
        if (k + 1) as usize == self.levels.len() - 1 {
            let mut out = CMatrix::zeros(self.n, self.n);
            for z in &self.level(k).blocks.central {
                out += &z.matmul(x).matmul(z);
            }
            return out;
        }
        project(&self.level(k).basis, &self.ip, x)
    }

    pub fn level_residual(&self, k: isize, x: &CMatrix) -> f64 {
        let nx = x.fro_norm().max(1e-300);
        (x - &self.proj(k, x)).fro_norm() / nx
    }

    /// Carry an operator from the model ambient to the top.
    pub fn embed_model(&self, x: &CMatrix) -> CMatrix {
        let mut y = x.clone();
        for s in &self.steps {
            y = s.left(&y);
        }
        y
    }

    pub fn embed_algebra(&self, alg: &Algebra) -> Algebra {
        let basis: Vec<CMatrix> = alg.basis().iter().map(|x| self.embed_model(x)).collect();
        let gens: Vec<CMatrix> = alg.generators().iter().map(|x| self.embed_model(x)).collect();
        let basis = orthonormalize(&basis, &self.ip);
        Algebra::from_parts(self.n, self.ip.clone(), basis, gens, None)
    }

    /// Orthonormal basis (top trace) of B′∩A_k or A′∩A_k.
    pub fn commutant(&self, k: usize, of: Of) -> &[CMatrix] {
        let cell = match of {
            Of::B => &self.comm_b[k],
            Of::A => &self.comm_a[k],
        };
        cell.get_or_init(|| {
            let gens = &self.level(if of == Of::B { -1 } else { 0 }).gens;
            let alg = self.level_algebra(k as isize);
            commutant_basis(gens, &alg)
        })
    }

    /// Residual of x lying in B′∩A_k (or A′∩A_k).
    pub fn commutant_residual(&self, k: usize, of: Of, x: &CMatrix) -> f64 {
        let gens = &self.level(if of == Of::B { -1 } else { 0 }).gens;
        let nx = x.fro_norm().max(1e-300);
        let c = gens.iter().map(|g| x.commutator(g).fro_norm() / (nx * g.fro_norm().max(1e-300))).fold(0.0, f64::max);
        c.max(self.level_residual(k as isize, x))
    }

    /// E^{B′∩A_k}_{A′∩A_k}(x) = τ Σ λ x λ*.
    pub fn commutant_expectation(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        for l in &self.lambda {
            out += &l.matmul(x).matmul(&l.adjoint());
        }
        out.scale_re(self.tau)
    }

    /// Push-down: x₀ = [A:B]₀ Ẽ(x₁e₁) ∈ A.
    pub fn push_down(&self, x1: &CMatrix) -> CMatrix {
        self.proj(0, &x1.matmul(self.e(1))).scale_re(self.index)
    }

    /// Ẽ: A₁ → A as a conditional expectation with its own quasi-basis.
    pub fn dual_expectation(&self) -> Result<CondExp> {
        let a1 = self.level_algebra(1);
        let a = self.level_algebra(0);
        tp_expectation(&a1, &a, &TraceState::from_density(self.rho.clone()))
    }

    /// {[A:B]₀^{1/2} λ_i e₁}, a quasi-basis for Ẽ.
    pub fn dual_quasi_basis(&self) -> Vec<CMatrix> {
        let s = self.index.sqrt();
        self.lambda.iter().map(|l| l.matmul(self.e(1)).scale_re(s)).collect()
    }

    /// e_{[−1,2n+1]} = τ^{−n(n+1)/2} (e_{n+1}⋯e₁)(e_{n+2}⋯e₂)⋯(e_{2n+1}⋯e_{n+1}).
    pub fn multi_step_projection(&self, n: usize) -> Result<CMatrix> {
        if self.depth < 2 * n + 1 {
            return Err(Error::DepthLimit { requested: 2 * n + 1, limit: self.depth });
        }
        let mut acc = CMatrix::identity(self.n);
        for i in 0..=n {
            acc = acc.matmul(&self.e_run(n + 1 + i, 1 + i));
        }
        Ok(acc.scale_re(self.tau.powf(-((n * (n + 1)) as f64) / 2.0)))
    }

    /// Quasi-basis of E₀∘E₁∘⋯∘E_n: τ^{−n(n+1)/4} λ_{i_n}(e₁⋯e_n)λ_{i_{n−1}}(e₁⋯e_{n−1})⋯λ_{i₁}e₁λ_{i₀}.
    pub fn composed_quasi_basis(&self, n: usize) -> Result<Vec<CMatrix>> {
        if self.depth < n {
            return Err(Error::DepthLimit { requested: n, limit: self.depth });
        }
        let mut words: Vec<CMatrix> = self.lambda.clone();
        for j in 1..=n {
            let run = self.e_run(1, j);
            let mut next = Vec::with_capacity(words.len() * self.lambda.len());
            for l in &self.lambda {
                let lr = l.matmul(&run);
                for wd in &words {
                    next.push(lr.matmul(wd));
                }
            }
            words = next;
        }
        let s = self.tau.powf(-((n * (n + 1)) as f64) / 4.0);
        Ok(words.into_iter().map(|x| x.scale_re(s)).collect())
    }

    /// Jones projection of an intermediate A_{k−1} ⊂ X ⊂ A_k whose right A_{k−1}-module is
    /// spanned by `span`: e_X = Σ γ e_{k+1} γ* for a quasi-basis γ of E^X_{A_{k−1}}.
    pub fn intermediate_jones(&self, k: usize, span: &[CMatrix]) -> Result<(CMatrix, Vec<CMatrix>)> {
        if k + 1 > self.depth {
            return Err(Error::DepthLimit { requested: k + 1, limit: self.depth });
        }
        let f = |x: &CMatrix| self.proj(k as isize - 1, x);
        let gamma = module_basis(&f, span)?;
        let ek = self.e(k + 1);
        let mut out = CMatrix::zeros(self.n, self.n);
        for g in &gamma {
            out += &g.matmul(ek).matmul(&g.adjoint());
        }
        Ok((out, gamma))
    }

    /// Quasi-basis residual of a family for E onto A_{k}, two-sided, over the given test elements.
    pub fn quasi_basis_residual(&self, k: isize, qb: &[CMatrix], tests: &[CMatrix]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in tests {
            let nx = x.fro_norm().max(1e-300);
            let mut l = CMatrix::zeros(self.n, self.n);
            let mut r = l.clone();
            for q in qb {
                l += &q.matmul(&self.proj(k, &q.adj_mul(x)));
                r += &self.proj(k, &x.matmul(q)).matmul(&q.adjoint());
            }
            worst = worst.max((&l - x).fro_norm() / nx).max((&r - x).fro_norm() / nx);
        }
        worst
    }

    /// Model-ambient size.
    pub fn model_ambient(&self) -> usize {
        self.model_ambient
    }
}

/// Relative residual ∥x − y∥/max(∥x∥,∥y∥,1e-300) in Frobenius norm.
pub fn rel(x: &CMatrix, y: &CMatrix) -> f64 {
    (x - y).fro_norm() / x.fro_norm().max(y.fro_norm()).max(1e-300)
}

/// Residual of being a projection: max(∥p² − p∥, ∥p − p*∥)/∥p∥.
pub fn projection_residual(p: &CMatrix) -> f64 {
    let s = p.fro_norm().max(1e-300);
    (&p.matmul(p) - p).fro_norm().max((p - &p.adjoint()).fro_norm()) / s
}

pub fn is_zero_ish(x: &CMatrix) -> bool {
    x.as_slice().iter().all(|z| *z == ZERO)
}
