//! Dense complex matrices and the Hermitian spectral calculus everything else sits on.

use crate::{tol, Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows*cols");
        CMatrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let cl = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, cl, |i, j| c(rows[i][j], 0.0))
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = c(x, 0.0);
        }
        m
    }

    /// Matrix unit e_{ij} in M_n.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.data[i * n + j] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn map_entries(mut self, mut f: impl FnMut(C64) -> C64) -> Self {
        for z in self.data.iter_mut() {
            *z = f(*z);
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// self += s * other
    pub fn axpy(&mut self, s: C64, other: &CMatrix) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let orow = &mut out[i * m..(i + 1) * m];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &rhs.data[p * m..(p + 1) * m];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        CMatrix { rows: n, cols: m, data: out }
    }

    /// self* · rhs without forming the adjoint.
    pub fn adj_mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, rhs.rows);
        let (k, n, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; n * m];
        for p in 0..k {
            let brow = &rhs.data[p * m..(p + 1) * m];
            for i in 0..n {
                let a = self.data[p * n + i].conj();
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let orow = &mut out[i * m..(i + 1) * m];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        CMatrix { rows: n, cols: m, data: out }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// Frobenius inner product Tr(self* other).
    pub fn fro_inner(&self, other: &CMatrix) -> C64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn hermitian_part(&self) -> CMatrix {
        (self + &self.adjoint()).scale_re(0.5)
    }

    /// Operator (spectral) norm through the spectrum of x*x.
    pub fn op_norm(&self) -> f64 {
        if self.fro_norm() == 0.0 {
            return 0.0;
        }
        let g = self.adj_mul(self).hermitian_part();
        match herm_eig(&g) {
            Ok(e) => e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
            Err(_) => self.fro_norm(),
        }
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (r, cl) = (self.rows * other.rows, self.cols * other.cols);
        CMatrix::from_fn(r, cl, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn is_hermitian(&self, rel: f64) -> bool {
        let n = self.fro_norm().max(1e-300);
        (self - &self.adjoint()).fro_norm() <= rel * n
    }

    /// Compress by an isometry: V* self V.
    pub fn compress(&self, v: &CMatrix) -> CMatrix {
        v.adj_mul(&self.matmul(v))
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn from_columns(rows: usize, cols: &[Vec<C64>]) -> CMatrix {
        CMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j && self[(i, j)] != ZERO {
                    return false;
                }
            }
        }
        true
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_re(-1.0)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.axpy(ONE, rhs);
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        self.axpy(-ONE, rhs);
    }
}

/// Product of a list of matrices, identity for the empty list.
pub fn product(n: usize, factors: &[&CMatrix]) -> CMatrix {
    let mut acc = CMatrix::identity(n);
    for f in factors {
        acc = acc.matmul(f);
    }
    acc
}

/// Spectral data of a Hermitian matrix: ascending eigenvalues, unitary of column eigenvectors.
#[derive(Clone, Debug)]
pub struct Eig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eig {
    /// V f(D) V*
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        let mut out = CMatrix::zeros(n, n);
        for k in 0..n {
            if fv[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = v[(i, k)] * fv[k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        out
    }

    /// Projection onto the span of the eigenvectors with the given indices.
    pub fn projection(&self, idx: &[usize]) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n, n);
        for &k in idx {
            for i in 0..n {
                let a = self.vectors[(i, k)];
                for j in 0..n {
                    out[(i, j)] += a * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    /// Groups of indices whose eigenvalues agree within `gap`.
    pub fn clusters(&self, gap: f64) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, &x) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(last) if (x - self.values[*last.last().unwrap()]).abs() <= gap => last.push(i),
                _ => out.push(vec![i]),
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn herm_eig(h: &CMatrix) -> Result<Eig> {
    if !h.is_square() {
        return Err(Error::NonHermitian("matrix is not square".into()));
    }
    let n = h.rows();
    let norm = h.fro_norm();
    if (h - &h.adjoint()).fro_norm() > tol::HERMITIAN * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitian(format!(
            "antihermitian part {:.3e} vs norm {:.3e}",
            (h - &h.adjoint()).fro_norm(),
            norm
        )));
    }
    let mut a = h.hermitian_part();
    let mut v = CMatrix::identity(n);
    if n <= 1 || norm == 0.0 {
        let values = (0..n).map(|i| a[(i, i)].re).collect();
        return Ok(Eig { values, vectors: v });
    }
    let stop = tol::JACOBI_OFFDIAG * norm;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)].norm_sqr();
                }
            }
        }
        if off.sqrt() < stop {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag < 1e-300 || mag < 1e-18 * norm {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // phase-rotate to a real symmetric 2x2 problem
                let ph = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum().max(0.0) * 2.0 - 1.0;
                let t = t / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // columns: a' = a J, J = [[cs, sn*ph], [-sn*conj(ph), cs]]
                let s_ph = ph * sn;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * s_ph.conj();
                    a[(k, q)] = akp * s_ph + akq * cs;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs - aqk * s_ph;
                    a[(q, k)] = apk * s_ph.conj() + aqk * cs;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = c(a[(p, p)].re, 0.0);
                a[(q, q)] = c(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs - vkq * s_ph.conj();
                    v[(k, q)] = vkp * s_ph + vkq * cs;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Eig { values, vectors })
}

/// h^{power} on the support of h, for PSD h and power ±1/2 (or any real power).
pub fn psd_root_pinv(h: &CMatrix, power: f64) -> Result<CMatrix> {
    let e = herm_eig(&h.hermitian_part())?;
    let mu_max = e.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if mu_max == 0.0 {
        return Ok(CMatrix::zeros(h.rows(), h.cols()));
    }
    if let Some(&lo) = e.values.first() {
        if lo < -tol::PSD_FLOOR * mu_max {
            return Err(Error::NotPsd(lo));
        }
    }
    let cut = tol::PINV_CUTOFF * mu_max;
    Ok(e.apply(|x| if x > cut { x.powf(power) } else { 0.0 }))
}

/// Support projection of a PSD (or Hermitian) matrix.
pub fn support_projection(h: &CMatrix) -> Result<CMatrix> {
    let e = herm_eig(&h.hermitian_part())?;
    let mu_max = e.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cut = tol::PINV_CUTOFF * mu_max.max(f64::MIN_POSITIVE);
    Ok(e.apply(|x| if x.abs() > cut { 1.0 } else { 0.0 }))
}

/// p ∨ q: the range projection of p + q.
pub fn projection_join(p: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let e = herm_eig(&(p + q).hermitian_part())?;
    Ok(e.apply(|x| if x > 1e-8 { 1.0 } else { 0.0 }))
}

/// p ∧ q: the eigenvalue-2 spectral projection of p + q.
pub fn projection_meet(p: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let e = herm_eig(&(p + q).hermitian_part())?;
    Ok(e.apply(|x| if x > 2.0 - 1e-6 { 1.0 } else { 0.0 }))
}

/// Orthonormal basis of the kernel of `map`, an explicit matrix acting on coordinate vectors.
pub fn nullspace(map: &CMatrix) -> Result<Vec<Vec<C64>>> {
    let g = map.adj_mul(map).hermitian_part();
    nullspace_of_gram(&g)
}

/// Kernel of M given its Gram matrix G = M*M.
pub fn nullspace_of_gram(g: &CMatrix) -> Result<Vec<Vec<C64>>> {
    nullspace_of_gram_scaled(g, 0.0)
}

/// As `nullspace_of_gram`, with `scale` an a-priori bound on ∥M∥² so that a Gram matrix made
/// only of rounding noise is recognized as zero.
pub fn nullspace_of_gram_scaled(g: &CMatrix, scale: f64) -> Result<Vec<Vec<C64>>> {
    let n = g.rows();
    let gmax = g.max_abs();
    if gmax == 0.0 || gmax <= 1e-24 * scale {
        return Ok((0..n).map(|i| (0..n).map(|j| if i == j { ONE } else { ZERO }).collect()).collect());
    }
    let e = herm_eig(&g.hermitian_part())?;
    let smax = e.values.last().copied().unwrap_or(0.0).max(0.0).max(scale);
    // singular values below NULL_CUTOFF * sigma_max
    let cut = (tol::NULL_CUTOFF * smax.sqrt()).powi(2).max(1e-24 * smax);
    Ok((0..n).filter(|&k| e.values[k] <= cut).map(|k| e.vectors.column(k)).collect())
}

/// Weighted trace inner product <x, y> = Tr(rho x* y).
#[derive(Clone, Debug)]
pub struct InnerProduct {
    weight: CMatrix,
    diag: Option<Vec<f64>>,
}

impl InnerProduct {
    pub fn new(weight: CMatrix) -> Result<Self> {
        if !weight.is_hermitian(1e-10) {
            return Err(Error::NonHermitian("inner-product weight".into()));
        }
        let diag = if weight.is_diagonal() { Some(weight.diagonal().iter().map(|z| z.re).collect()) } else { None };
        Ok(InnerProduct { weight, diag })
    }

    /// Plain Frobenius inner product.
    pub fn frobenius(n: usize) -> Self {
        InnerProduct { weight: CMatrix::identity(n), diag: Some(vec![1.0; n]) }
    }

    /// Normalized trace Tr/n.
    pub fn tracial(n: usize) -> Self {
        let w = 1.0 / n as f64;
        InnerProduct { weight: CMatrix::identity(n).scale_re(w), diag: Some(vec![w; n]) }
    }

    pub fn weight(&self) -> &CMatrix {
        &self.weight
    }

    /// Tr(rho x)
    pub fn functional(&self, x: &CMatrix) -> C64 {
        match &self.diag {
            Some(d) => d.iter().enumerate().map(|(i, w)| x[(i, i)] * *w).sum(),
            None => self.weight.matmul(x).trace(),
        }
    }

    pub fn inner(&self, x: &CMatrix, y: &CMatrix) -> C64 {
        match &self.diag {
            // Tr(x* y rho) = sum_ij conj(x_ij) y_ij rho_j
            Some(d) => {
                let n = x.cols();
                x.as_slice()
                    .iter()
                    .zip(y.as_slice())
                    .enumerate()
                    .map(|(k, (a, b))| a.conj() * b * d[k % n])
                    .sum()
            }
            None => x.fro_inner(&y.matmul(&self.weight)),
        }
    }

    pub fn norm(&self, x: &CMatrix) -> f64 {
        self.inner(x, x).re.max(0.0).sqrt()
    }

    /// Riesz representer r with <x, y> = fro_inner(r, y)... i.e. r = x rho.
    pub fn riesz(&self, x: &CMatrix) -> CMatrix {
        match &self.diag {
            Some(d) => {
                let n = x.cols();
                let mut r = x.clone();
                for (k, z) in r.as_mut_slice().iter_mut().enumerate() {
                    *z *= d[k % n];
                }
                r
            }
            None => x.matmul(&self.weight),
        }
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
pub fn orthonormalize(vectors: &[CMatrix], ip: &InnerProduct) -> Vec<CMatrix> {
    let max_norm = vectors.iter().map(|v| ip.norm(v)).fold(0.0, f64::max);
    orthonormalize_with_floor(vectors, ip, tol::DROP * max_norm)
}

pub fn orthonormalize_with_floor(vectors: &[CMatrix], ip: &InnerProduct, floor: f64) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = Vec::new();
    extend_orthonormal(&mut out, vectors, ip, floor);
    out
}

/// Appends the components of `vectors` orthogonal to `basis`; returns how many were added.
pub fn extend_orthonormal(basis: &mut Vec<CMatrix>, vectors: &[CMatrix], ip: &InnerProduct, floor: f64) -> usize {
    let start = basis.len();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in basis.iter() {
                let p = ip.inner(u, &w);
                if p != ZERO {
                    w.axpy(-p, u);
                }
            }
        }
        let nw = ip.norm(&w);
        if nw > floor && nw > 0.0 {
            basis.push(w.scale_re(1.0 / nw));
        }
    }
    basis.len() - start
}

/// Orthogonal projection onto span(onb) under ip.
pub fn project(onb: &[CMatrix], ip: &InnerProduct, x: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(x.rows(), x.cols());
    for u in onb {
        let p = ip.inner(u, x);
        if p != ZERO {
            out.axpy(p, u);
        }
    }
    out
}

/// Orthonormal vectors of C^n (plain Gram-Schmidt on coordinate vectors).
pub fn orthonormalize_vecs(vs: &[Vec<C64>], floor: f64) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let p: C64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in w.iter_mut().zip(u) {
                    *x -= p * y;
                }
            }
        }
        let nw = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nw > floor {
            out.push(w.into_iter().map(|z| z / nw).collect());
        }
    }
    out
}
