//! Concrete finite-dimensional *-algebras sitting inside M_N, and inclusions between them.

use crate::numkernel::{
    extend_orthonormal, herm_eig, nullspace_of_gram_scaled, orthonormalize, project, CMatrix, InnerProduct, C64, ONE, ZERO,
};
use crate::rng::{hermitian_combination, seeded};
use crate::{tol, Error, Result};

/// Seed for the internal generic elements used by structural routines.
const STRUCT_SEED: u64 = 0xB10C;

/// Block structure of a multi-matrix algebra: A = ⊕ M_{d_i} acting with multiplicity m_i.
#[derive(Clone, Debug)]
pub struct BlockData {
    pub central: Vec<CMatrix>,
    pub dims: Vec<usize>,
    pub mults: Vec<usize>,
    /// One minimal projection per block.
    pub minimal: Vec<CMatrix>,
}

impl BlockData {
    pub fn len(&self) -> usize {
        self.dims.len()
    }
    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
    pub fn algebra_dim(&self) -> usize {
        self.dims.iter().map(|d| d * d).sum()
    }

    /// Density of the trace whose minimal projection in block i has weight w_i.
    pub fn density(&self, weights: &[f64]) -> CMatrix {
        let n = self.central.first().map_or(0, |z| z.rows());
        let mut rho = CMatrix::zeros(n, n);
        for i in 0..self.len() {
            rho.axpy(C64::new(weights[i] / self.mults[i] as f64, 0.0), &self.central[i]);
        }
        rho
    }

    /// Apply a *-homomorphism to every stored projection.
    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix, mults: Vec<usize>) -> BlockData {
        BlockData {
            central: self.central.iter().map(&f).collect(),
            dims: self.dims.clone(),
            mults,
            minimal: self.minimal.iter().map(&f).collect(),
        }
    }

    /// Full block-diagonal algebra ⊕ M_{d_i} on C^{Σ d_i}.
    pub fn full(sizes: &[usize]) -> BlockData {
        let n: usize = sizes.iter().sum();
        let mut central = Vec::new();
        let mut minimal = Vec::new();
        let mut off = 0;
        for &d in sizes {
            let mut z = CMatrix::zeros(n, n);
            for i in off..off + d {
                z[(i, i)] = ONE;
            }
            central.push(z);
            minimal.push(CMatrix::unit(n, off, off));
            off += d;
        }
        BlockData { central, dims: sizes.to_vec(), mults: vec![1; sizes.len()], minimal }
    }
}

/// A unital *-subalgebra of M_N, stored as a basis orthonormal for `ip`.
#[derive(Clone, Debug)]
pub struct Algebra {
    n: usize,
    ip: InnerProduct,
    basis: Vec<CMatrix>,
    gens: Vec<CMatrix>,
    blocks: Option<BlockData>,
}

impl Algebra {
    /// Trust the caller: `basis` is ip-orthonormal and spans a unital *-algebra.
    pub fn from_parts(n: usize, ip: InnerProduct, basis: Vec<CMatrix>, gens: Vec<CMatrix>, blocks: Option<BlockData>) -> Self {
        Algebra { n, ip, basis, gens, blocks }
    }

    pub fn scalars(n: usize) -> Self {
        let ip = InnerProduct::frobenius(n);
        let one = CMatrix::identity(n).scale_re(1.0 / (n as f64).sqrt());
        let blocks = BlockData { central: vec![CMatrix::identity(n)], dims: vec![1], mults: vec![n], minimal: vec![CMatrix::identity(n)] };
        Algebra { n, ip, basis: vec![one], gens: vec![CMatrix::identity(n)], blocks: Some(blocks) }
    }

    /// The full block-diagonal algebra with given block sizes on C^{Σ sizes}.
    pub fn full_blocks(sizes: &[usize], ip: InnerProduct) -> Self {
        let n: usize = sizes.iter().sum();
        let mut units = Vec::new();
        let mut off = 0;
        for &d in sizes {
            for i in 0..d {
                for j in 0..d {
                    units.push(CMatrix::unit(n, off + i, off + j));
                }
            }
            off += d;
        }
        let basis = units.iter().map(|u| u.scale_re(1.0 / ip.norm(u))).collect();
        Algebra { n, ip, basis, gens: units, blocks: Some(BlockData::full(sizes)) }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }
    pub fn ip(&self) -> &InnerProduct {
        &self.ip
    }
    pub fn generators(&self) -> &[CMatrix] {
        if self.gens.is_empty() {
            &self.basis
        } else {
            &self.gens
        }
    }

    /// Orthogonal projection onto the algebra under its inner product.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        project(&self.basis, &self.ip, x)
    }

    /// Relative distance of x from the algebra.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        let nx = x.fro_norm();
        if nx == 0.0 {
            return 0.0;
        }
        (x - &self.project(x)).fro_norm() / nx
    }

    pub fn contains(&self, x: &CMatrix) -> bool {
        self.residual(x) <= tol::OPERATOR * 10.0
    }

    /// Same algebra, basis re-orthonormalized for another inner product.
    pub fn with_ip(&self, ip: InnerProduct) -> Algebra {
        let basis = orthonormalize(&self.basis, &ip);
        Algebra { n: self.n, ip, basis, gens: self.gens.clone(), blocks: self.blocks.clone() }
    }

    /// Largest relative residual of basis(self) inside other.
    pub fn nesting_residual(&self, other: &Algebra) -> f64 {
        self.basis.iter().map(|b| other.residual(b)).fold(0.0, f64::max)
    }

    pub fn is_subalgebra_of(&self, other: &Algebra) -> bool {
        self.nesting_residual(other) <= 1e-8
    }

    /// Frobenius distance between the orthogonal projections onto the two subspaces.
    pub fn subspace_distance(&self, other: &Algebra) -> f64 {
        // ∥P−Q∥² = dim P + dim Q − 2 Σ |⟨p_i, q_j⟩|² for Frobenius-orthonormal bases
        let fro = InnerProduct::frobenius(self.n);
        let p = orthonormalize(&self.basis, &fro);
        let q = orthonormalize(&other.basis, &fro);
        let mut cross = 0.0;
        for a in &p {
            for b in &q {
                cross += a.fro_inner(b).norm_sqr();
            }
        }
        ((p.len() + q.len()) as f64 - 2.0 * cross).max(0.0).sqrt()
    }

    /// Largest closure defect of the basis under products and adjoints, each measured
    /// against ∥a∥∥b∥ so that products which vanish do not count as noise.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            worst = worst.max(self.residual(&a.adjoint()));
            let na = a.fro_norm();
            for b in &self.basis {
                let ab = a.matmul(b);
                let d = (&ab - &self.project(&ab)).fro_norm() / (na * b.fro_norm()).max(1e-300);
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn blocks(&mut self) -> Result<&BlockData> {
        if self.blocks.is_none() {
            self.blocks = Some(block_decompose(self)?);
        }
        Ok(self.blocks.as_ref().unwrap())
    }

    pub fn cached_blocks(&self) -> Option<&BlockData> {
        self.blocks.as_ref()
    }

    pub fn block_data(&self) -> Result<BlockData> {
        match &self.blocks {
            Some(b) => Ok(b.clone()),
            None => block_decompose(self),
        }
    }

    pub fn is_commutative(&self) -> bool {
        let g = self.generators();
        g.iter().all(|a| g.iter().all(|b| a.commutator(b).fro_norm() <= 1e-10 * (1.0 + a.fro_norm() * b.fro_norm())))
    }

    /// Conjugate by a unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Algebra {
        let us = u.adjoint();
        let f = |x: &CMatrix| u.matmul(x).matmul(&us);
        let basis = self.basis.iter().map(f).collect::<Vec<_>>();
        let gens = self.gens.iter().map(f).collect();
        let ip = InnerProduct::frobenius(self.n);
        let basis = orthonormalize(&basis, &ip);
        Algebra { n: self.n, ip, basis, gens, blocks: None }
    }

    /// Image under a linear *-homomorphism into another ambient.
    pub fn map_hom(&self, f: impl Fn(&CMatrix) -> CMatrix, ip: InnerProduct) -> Algebra {
        let basis: Vec<CMatrix> = self.basis.iter().map(&f).collect();
        let gens = self.gens.iter().map(&f).collect();
        let n = basis.first().map_or(0, |b| b.rows());
        let basis = orthonormalize(&basis, &ip);
        Algebra { n, ip, basis, gens, blocks: None }
    }
}

/// Hermitian generating set {g + g*, i(g − g*)} with zero elements dropped.
pub fn hermitian_generators(gens: &[CMatrix]) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for g in gens {
        let gs = g.adjoint();
        let a = &g.clone() + &gs;
        let b = (g - &gs).scale(C64::new(0.0, 1.0));
        for x in [a, b] {
            if x.fro_norm() > 1e-14 {
                out.push(x);
            }
        }
    }
    out
}

/// Smallest unital *-algebra containing the generators.
pub fn span_closure(generators: &[CMatrix], n: usize) -> Algebra {
    span_closure_ip(generators, InnerProduct::frobenius(n))
}

pub fn span_closure_ip(generators: &[CMatrix], ip: InnerProduct) -> Algebra {
    let n = ip.weight().rows();
    let mut gens: Vec<CMatrix> = generators.to_vec();
    gens.extend(generators.iter().map(|g| g.adjoint()));
    let scale = gens.iter().map(|g| ip.norm(g)).fold(ip.norm(&CMatrix::identity(n)), f64::max);
    let floor = tol::DROP * scale;
    let mut basis: Vec<CMatrix> = Vec::new();
    extend_orthonormal(&mut basis, &[CMatrix::identity(n)], &ip, floor);
    extend_orthonormal(&mut basis, &gens, &ip, floor);
    // words in the generators: multiply each new basis element on the right by every generator
    let mut next = 0;
    while next < basis.len() {
        let b = basis[next].clone();
        next += 1;
        let prods: Vec<CMatrix> = gens.iter().map(|g| b.matmul(g)).collect();
        let bn = prods.iter().map(|p| ip.norm(p)).fold(0.0, f64::max);
        extend_orthonormal(&mut basis, &prods, &ip, tol::DROP * bn.max(floor));
        if basis.len() > n * n {
            break;
        }
    }
    Algebra { n, ip, basis, gens: generators.to_vec(), blocks: None }
}

/// Relative commutant {x ∈ A : [x, g] = 0 for all g}; basis orthonormal in A's inner product.
pub fn relative_commutant(gens: &[CMatrix], a: &Algebra) -> Algebra {
    let basis = commutant_basis(gens, a);
    Algebra { n: a.n, ip: a.ip.clone(), basis, gens: Vec::new(), blocks: None }
}

pub fn commutant_basis(gens: &[CMatrix], a: &Algebra) -> Vec<CMatrix> {
    let hg = hermitian_generators(gens);
    let nonscalar: Vec<&CMatrix> = hg.iter().filter(|g| !is_scalar(g)).collect();
    if nonscalar.is_empty() {
        return a.basis.clone();
    }
    if let Some(sizes) = full_block_sizes(a) {
        let hint: Vec<CMatrix> = nonscalar.iter().map(|g| (*g).clone()).collect();
        let raw = commutant_in_blocks(&sizes, &hint, &hint);
        return orthonormalize(&raw, &a.ip);
    }
    let k = a.basis.len();
    // commutators, then Gram in the ip-orthonormal coordinates of A
    let comms: Vec<Vec<CMatrix>> = a.basis.iter().map(|b| nonscalar.iter().map(|g| b.commutator(g)).collect()).collect();
    let mut gram = CMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let mut s = ZERO;
            for (x, y) in comms[i].iter().zip(&comms[j]) {
                s += x.fro_inner(y);
            }
            gram[(i, j)] = s;
            gram[(j, i)] = s.conj();
        }
    }
    let gscale: f64 = nonscalar.iter().map(|g| g.fro_norm().powi(2)).sum::<f64>()
        * a.basis.iter().map(|b| b.fro_norm().powi(2)).fold(0.0, f64::max);
    let null = nullspace_of_gram_scaled(&gram, 4.0 * gscale).expect("gram is hermitian");
    let out: Vec<CMatrix> = null
        .iter()
        .map(|v| {
            let mut x = CMatrix::zeros(a.n, a.n);
            for (coef, b) in v.iter().zip(&a.basis) {
                x.axpy(*coef, b);
            }
            x
        })
        .collect();
    orthonormalize(&out, &a.ip)
}

fn is_scalar(x: &CMatrix) -> bool {
    let n = x.rows();
    let t = x.trace() / n as f64;
    (x - &CMatrix::identity(n).scale(t)).fro_norm() <= 1e-13 * (1.0 + x.fro_norm())
}

/// Block sizes if `a` is exactly the full block-diagonal algebra on its ambient.
fn full_block_sizes(a: &Algebra) -> Option<Vec<usize>> {
    let b = a.blocks.as_ref()?;
    if b.mults.iter().any(|&m| m != 1) || b.algebra_dim() != a.dim() {
        return None;
    }
    let mut sizes = Vec::new();
    let mut off = 0;
    for (z, &d) in b.central.iter().zip(&b.dims) {
        for i in 0..a.n {
            let on = i >= off && i < off + d;
            if (z[(i, i)].re - if on { 1.0 } else { 0.0 }).abs() > 1e-12 {
                return None;
            }
        }
        off += d;
        sizes.push(d);
    }
    (off == a.n).then_some(sizes)
}

/// Commutant of `gens` inside ⊕ M_{d_j} (block-diagonal on C^{Σd_j}).
///
/// Each block is handled in the eigenbasis of a generic Hermitian element of the algebra
/// generated by `hint`; only matrix units inside one eigenvalue cluster can commute with it.
pub fn commutant_in_blocks(sizes: &[usize], gens: &[CMatrix], hint: &[CMatrix]) -> Vec<CMatrix> {
    let n: usize = sizes.iter().sum();
    let mut r = seeded(STRUCT_SEED);
    let h = hermitian_combination(&mut r, hint);
    let mut out = Vec::new();
    let mut off = 0;
    for &d in sizes {
        let sub = |x: &CMatrix| CMatrix::from_fn(d, d, |i, j| x[(off + i, off + j)]);
        let hj = sub(&h).hermitian_part();
        let eig = herm_eig(&hj).expect("hermitian by construction");
        let scale = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let clusters = eig.clusters(1e-7 * scale);
        let v = &eig.vectors;
        let pairs: Vec<(usize, usize)> =
            clusters.iter().flat_map(|cl| cl.iter().flat_map(move |&a| cl.iter().map(move |&b| (a, b)))).collect();
        let rdim = pairs.len();
        let mut gram = CMatrix::zeros(rdim, rdim);
        for g in gens {
            let gj = sub(g);
            if gj.fro_norm() == 0.0 {
                continue;
            }
            let m = v.adj_mul(&gj.matmul(v));
            let n1 = v.adj_mul(&gj.matmul(&gj.adjoint()).matmul(v));
            let n2 = v.adj_mul(&gj.adj_mul(&gj).matmul(v));
            for (p, &(a, b)) in pairs.iter().enumerate() {
                for (q, &(cc, dd)) in pairs.iter().enumerate().skip(p) {
                    let mut s = -m[(a, cc)] * m[(b, dd)].conj() - m[(cc, a)].conj() * m[(dd, b)];
                    if a == cc {
                        s += n1[(dd, b)];
                    }
                    if dd == b {
                        s += n2[(a, cc)];
                    }
                    gram[(p, q)] += s;
                }
            }
        }
        for p in 0..rdim {
            for q in 0..p {
                gram[(p, q)] = gram[(q, p)].conj();
            }
        }
        let gscale: f64 = gens.iter().map(|g| sub(g).fro_norm().powi(2)).sum();
        let null = nullspace_of_gram_scaled(&gram, 4.0 * gscale).expect("gram is hermitian");
        for coef in null {
            let mut xe = CMatrix::zeros(d, d);
            for (cf, &(a, b)) in coef.iter().zip(&pairs) {
                xe[(a, b)] += *cf;
            }
            let xb = v.matmul(&xe).matmul(&v.adjoint());
            let mut x = CMatrix::zeros(n, n);
            for i in 0..d {
                for j in 0..d {
                    x[(off + i, off + j)] = xb[(i, j)];
                }
            }
            out.push(x);
        }
        off += d;
    }
    out
}

/// Center of the algebra.
pub fn center(a: &Algebra) -> Algebra {
    relative_commutant(a.generators(), a)
}

/// Minimal central projections, block dimensions, multiplicities and minimal projections.
pub fn block_decompose(a: &Algebra) -> Result<BlockData> {
    let n = a.n;
    let z = center(a);
    let mut r = seeded(STRUCT_SEED ^ 0x5eed);
    let h = hermitian_combination(&mut r, z.basis());
    let eig = herm_eig(&h.hermitian_part())?;
    let scale = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let clusters = eig.clusters(1e-6 * scale);
    if clusters.len() != z.dim() {
        return Err(Error::InconsistentBlocks(format!("{} spectral clusters for a {}-dim center", clusters.len(), z.dim())));
    }
    let fro = InnerProduct::frobenius(n);
    let hh = hermitian_combination(&mut r, a.basis());
    let mut parts: Vec<(usize, usize, usize, CMatrix, CMatrix)> = Vec::new();
    for cl in clusters {
        let zi = eig.projection(&cl);
        let rank = cl.len();
        let za: Vec<CMatrix> = a.basis().iter().map(|b| zi.matmul(b)).collect();
        let zdim = orthonormalize(&za, &fro).len();
        let d = (zdim as f64).sqrt();
        let dr = d.round();
        if (d - dr).abs() > tol::ROUNDING || dr < 1.0 {
            return Err(Error::InconsistentBlocks(format!("block of dimension {zdim} is not a square")));
        }
        let d = dr as usize;
        if rank % d != 0 {
            return Err(Error::InconsistentBlocks(format!("rank {rank} not divisible by block size {d}")));
        }
        let m = rank / d;
        let p = CMatrix::from_fn(n, rank, |i, j| eig.vectors[(i, cl[j])]);
        let hz = hh.compress(&p).hermitian_part();
        let ez = herm_eig(&hz)?;
        let low = CMatrix::from_fn(rank, m, |i, j| ez.vectors[(i, j)]);
        let v = p.matmul(&low);
        let minimal = v.matmul(&v.adjoint());
        let first = (0..n).find(|&i| zi[(i, i)].re > 1e-6).unwrap_or(n);
        parts.push((d, first, m, zi, minimal));
    }
    parts.sort_by_key(|p| (p.0, p.1));
    Ok(BlockData {
        dims: parts.iter().map(|p| p.0).collect(),
        mults: parts.iter().map(|p| p.2).collect(),
        central: parts.iter().map(|p| p.3.clone()).collect(),
        minimal: parts.iter().map(|p| p.4.clone()).collect(),
    })
}

fn round_count(x: f64, what: &str) -> Result<usize> {
    let r = x.round();
    if (x - r).abs() > tol::ROUNDING || r < 0.0 {
        return Err(Error::InconsistentBlocks(format!("{what} {x} is not an integer")));
    }
    Ok(r as usize)
}

/// Λ_{ij} = multiplicity of block j of `small` inside block i of `big`.
pub fn inclusion_matrix(big: &BlockData, small: &BlockData) -> Result<Vec<Vec<usize>>> {
    let mut lam = vec![vec![0; small.len()]; big.len()];
    for i in 0..big.len() {
        for j in 0..small.len() {
            let r = big.central[i].matmul(&small.minimal[j]).trace().re / big.mults[i] as f64;
            lam[i][j] = round_count(r, "inclusion multiplicity")?;
        }
        let total: usize = (0..small.len()).map(|j| lam[i][j] * small.dims[j]).sum();
        if total != big.dims[i] {
            return Err(Error::InconsistentBlocks(format!("row {i} of Λ gives {total}, block has size {}", big.dims[i])));
        }
    }
    Ok(lam)
}

/// Ordered pair B ⊆ A with common unit and inclusion matrix.
#[derive(Clone, Debug)]
pub struct InclusionPair {
    pub big: Algebra,
    pub small: Algebra,
    pub lambda: Vec<Vec<usize>>,
}

impl InclusionPair {
    pub fn new(mut big: Algebra, mut small: Algebra) -> Result<Self> {
        if big.n != small.n {
            return Err(Error::NotNested(f64::INFINITY));
        }
        let res = small.nesting_residual(&big);
        if res > 1e-8 {
            return Err(Error::NotNested(res));
        }
        let id = CMatrix::identity(big.n);
        if big.residual(&id) > 1e-9 || small.residual(&id) > 1e-9 {
            return Err(Error::NotNested(1.0));
        }
        big.blocks()?;
        small.blocks()?;
        let lambda = inclusion_matrix(big.cached_blocks().unwrap(), small.cached_blocks().unwrap())?;
        Ok(InclusionPair { big, small, lambda })
    }

    pub fn big_blocks(&self) -> &BlockData {
        self.big.cached_blocks().expect("computed in new")
    }
    pub fn small_blocks(&self) -> &BlockData {
        self.small.cached_blocks().expect("computed in new")
    }

    /// Connected components of the Bratteli graph, as (A-blocks, B-blocks).
    pub fn components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        use petgraph::unionfind::UnionFind;
        let na = self.lambda.len();
        let nb = self.lambda.first().map_or(0, |r| r.len());
        let mut uf = UnionFind::new(na + nb);
        for i in 0..na {
            for j in 0..nb {
                if self.lambda[i][j] > 0 {
                    uf.union(i, na + j);
                }
            }
        }
        let labels = uf.into_labeling();
        let mut roots: Vec<usize> = labels.clone();
        roots.sort();
        roots.dedup();
        roots
            .iter()
            .map(|&r| {
                let a = (0..na).filter(|&i| labels[i] == r).collect();
                let b = (0..nb).filter(|&j| labels[na + j] == r).collect();
                (a, b)
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    pub fn relative_commutant(&self) -> Algebra {
        relative_commutant(self.small.generators(), &self.big)
    }
}

/// Isometry onto the range of a projection.
pub fn range_isometry(p: &CMatrix) -> Result<CMatrix> {
    let e = herm_eig(&p.hermitian_part())?;
    let idx: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > 0.5).collect();
    for &x in &e.values {
        if x.min((x - 1.0).abs()) > tol::PROJECTION {
            return Err(Error::NotProjection(x.min((x - 1.0).abs())));
        }
    }
    Ok(CMatrix::from_fn(p.rows(), idx.len(), |i, j| e.vectors[(i, idx[j])]))
}

/// pBp ⊂ pAp, represented on the range of p.
pub fn compress_by_projection(p: &CMatrix, pair: &InclusionPair) -> Result<InclusionPair> {
    let pres = (&p.matmul(p) - p).fro_norm().max((p - &p.adjoint()).fro_norm());
    if pres > tol::PROJECTION || p.fro_norm() < tol::PROJECTION {
        return Err(Error::NotProjection(pres));
    }
    let inres = pair.big.residual(p);
    let cres = pair.small.generators().iter().map(|b| b.commutator(p).fro_norm()).fold(0.0, f64::max);
    if inres > 1e-8 || cres > 1e-8 {
        return Err(Error::NotInCommutant(inres.max(cres)));
    }
    let v = range_isometry(p)?;
    let m = v.cols();
    let ip = InnerProduct::frobenius(m);
    let cut = |alg: &Algebra| -> Algebra {
        let basis: Vec<CMatrix> = alg.basis().iter().map(|x| x.compress(&v)).collect();
        let gens: Vec<CMatrix> = alg.generators().iter().map(|x| x.compress(&v)).collect();
        let basis = orthonormalize(&basis, &ip);
        Algebra::from_parts(m, ip.clone(), basis, gens, None)
    };
    InclusionPair::new(cut(&pair.big), cut(&pair.small))
}

/// Faithful representation of minimal ambient dimension Σ d_i, by compressing to ⊕ A·v_i
/// with v_i in the range of a minimal projection of block i. Returns the compressing isometry.
pub fn re_represent(top: &Algebra) -> Result<CMatrix> {
    let blocks = top.block_data()?;
    let n = top.n;
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for (i, p) in blocks.minimal.iter().enumerate() {
        let v = range_isometry(p).map_err(|e| Error::RepresentationFailure(e.to_string()))?;
        let v0 = v.column(0);
        let vecs: Vec<Vec<C64>> = top
            .basis()
            .iter()
            .map(|a| (0..n).map(|r| (0..n).map(|k| a[(r, k)] * v0[k]).sum()).collect())
            .collect();
        let mut all = cols.clone();
        all.extend(vecs);
        let onb = crate::numkernel::orthonormalize_vecs(&all, 1e-9);
        if onb.len() != cols.len() + blocks.dims[i] {
            return Err(Error::RepresentationFailure(format!(
                "cyclic subspace of block {i} has dimension {} instead of {}",
                onb.len() - cols.len(),
                blocks.dims[i]
            )));
        }
        cols = onb;
    }
    Ok(CMatrix::from_columns(n, &cols))
}
