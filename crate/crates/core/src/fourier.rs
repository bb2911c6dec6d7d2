//! Fourier transforms between relative commutants, rotations, the mirrorings γ₀ and γ₁,
//! the shift and the coproduct.
//!
//! Conventions: F_k: B′∩A_k → A′∩A_{k+1},
//!   F_k(x) = τ^{−(k+2)/2} E^{B′∩A_{k+1}}_{A′∩A_{k+1}}(x e_{k+1}⋯e₁),
//!   F_k⁻¹(y) = τ^{−(k+2)/2} E_{k+1}(y e₁⋯e_{k+1}).

use crate::numkernel::CMatrix;
use crate::tower::{rel, Of, Tower};
use crate::{tol, Error, Result};

pub struct Fourier<'a> {
    pub tower: &'a Tower,
    /// Reject inputs farther than this from the required commutant.
    pub membership_tol: f64,
}

impl<'a> Fourier<'a> {
    pub fn new(tower: &'a Tower) -> Self {
        Fourier { tower, membership_tol: tol::SUBSPACE }
    }

    fn need(&self, k: usize) -> Result<()> {
        if k > self.tower.depth {
            return Err(Error::DepthLimit { requested: k, limit: self.tower.depth });
        }
        Ok(())
    }

    fn member(&self, k: usize, of: Of, x: &CMatrix) -> Result<()> {
        let r = self.tower.commutant_residual(k, of, x);
        if r > self.membership_tol {
            return Err(Error::NotInCommutant(r));
        }
        Ok(())
    }

    fn scale(&self, k: usize) -> f64 {
        self.tower.tau.powf(-((k + 2) as f64) / 2.0)
    }

    pub fn fourier(&self, k: usize, x: &CMatrix) -> Result<CMatrix> {
        self.need(k + 1)?;
        self.member(k, Of::B, x)?;
        let t = self.tower;
        let y = x.matmul(&t.e_run(k + 1, 1));
        Ok(t.commutant_expectation(&y).scale_re(self.scale(k)))
    }

    /// Same transform through the ambient orthogonal projection onto A′∩A_{k+1}.
    pub fn fourier_by_projection(&self, k: usize, x: &CMatrix) -> Result<CMatrix> {
        self.need(k + 1)?;
        let t = self.tower;
        let y = x.matmul(&t.e_run(k + 1, 1));
        let basis = t.commutant(k + 1, Of::A);
        Ok(crate::numkernel::project(basis, t.ip(), &y).scale_re(self.scale(k)))
    }

    pub fn fourier_inv(&self, k: usize, y: &CMatrix) -> Result<CMatrix> {
        self.need(k + 1)?;
        self.member(k + 1, Of::A, y)?;
        let t = self.tower;
        let z = y.matmul(&t.e_run(1, k + 1));
        Ok(t.proj(k as isize, &z).scale_re(self.scale(k)))
    }

    /// ρ_k(x) = (F_k⁻¹(F_k(x)*))*.
    pub fn rotation(&self, k: usize, x: &CMatrix) -> Result<CMatrix> {
        let f = self.fourier(k, x)?;
        Ok(self.fourier_inv(k, &f.adjoint())?.adjoint())
    }

    /// ρ_k(x) = τ^{−k} Σᵢ E_k(e_k⋯e₁λᵢx) e_k⋯e₁λᵢ*; needs only A_k.
    pub fn rotation_by_basis(&self, k: usize, x: &CMatrix) -> Result<CMatrix> {
        if k == 0 {
            return Ok(x.clone());
        }
        self.need(k)?;
        self.member(k, Of::B, x)?;
        let t = self.tower;
        let run = t.e_run(k, 1);
        let n = t.ambient();
        let mut out = CMatrix::zeros(n, n);
        for l in t.lambda() {
            let inner = t.proj(k as isize - 1, &run.matmul(l).matmul(x));
            out += &inner.matmul(&run.matmul(&l.adjoint()));
        }
        Ok(out.scale_re(t.tau.powi(-(k as i32))))
    }

    /// γ₀ = ρ₁ on B′∩A₁.
    pub fn gamma0(&self, x: &CMatrix) -> Result<CMatrix> {
        self.need(2)?;
        self.rotation(1, x)
    }

    /// γ₁ = ρ₁ of the inclusion B ⊂ A₁, acting on B′∩A₃. The composed inclusion has
    /// τ′ = τ², Jones projection e′ = τ⁻¹e₂e₁e₃e₂ and quasi-basis μ = τ^{−1/2}λᵢe₁λⱼ.
    pub fn gamma1(&self, y: &CMatrix) -> Result<CMatrix> {
        self.need(3)?;
        self.member(3, Of::B, y)?;
        let t = self.tower;
        let ep = t.e_word(&[2, 1, 3, 2]).scale_re(1.0 / t.tau);
        let mu = self.composed_basis();
        let n = t.ambient();
        let mut out = CMatrix::zeros(n, n);
        for m in &mu {
            out += &t.proj(1, &ep.matmul(m).matmul(y)).matmul(&ep.matmul(&m.adjoint()));
        }
        Ok(out.scale_re(t.tau.powi(-2)))
    }

    /// Quasi-basis {τ^{−1/2} λᵢ e₁ λⱼ} for the composed expectation A₁ → B.
    pub fn composed_basis(&self) -> Vec<CMatrix> {
        let t = self.tower;
        let s = t.tau.powf(-0.5);
        let mut out = Vec::new();
        for li in t.lambda() {
            let le = li.matmul(t.e(1));
            for lj in t.lambda() {
                out.push(le.matmul(lj).scale_re(s));
            }
        }
        out
    }

    /// ρ₃ by the quasi-basis formula (A₃ suffices).
    pub fn rho3(&self, y: &CMatrix) -> Result<CMatrix> {
        self.rotation_by_basis(3, y)
    }

    /// γ₁γ₀: B′∩A₁ → A₁′∩A₃.
    pub fn shift(&self, x: &CMatrix) -> Result<CMatrix> {
        self.gamma1(&self.gamma0(x)?)
    }

    /// γ₀γ₁: A₁′∩A₃ → B′∩A₁.
    pub fn shift_inv(&self, y: &CMatrix) -> Result<CMatrix> {
        self.gamma0(&self.gamma1(y)?)
    }

    /// x ∘ y = F_k⁻¹(F_k(y) F_k(x)).
    pub fn coproduct(&self, k: usize, x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
        let fx = self.fourier(k, x)?;
        let fy = self.fourier(k, y)?;
        self.fourier_inv(k, &fy.matmul(&fx))
    }

    /// τ^{−k/2} e₁⋯e_k, the unit for ∘.
    pub fn coproduct_identity(&self, k: usize) -> CMatrix {
        let t = self.tower;
        if k == 0 {
            return CMatrix::identity(t.ambient());
        }
        t.e_run(1, k).scale_re(t.tau.powf(-(k as f64) / 2.0))
    }

    /// ∥x∥₂ = tr(x*x)^{1/2} under the tower trace.
    pub fn norm2(&self, x: &CMatrix) -> f64 {
        self.tower.ip().norm(x)
    }

    /// |∥F_k(x)∥₂ − ∥x∥₂| / ∥x∥₂.
    pub fn isometry_defect(&self, k: usize, x: &CMatrix) -> Result<f64> {
        let f = self.fourier(k, x)?;
        let a = self.norm2(x);
        Ok((self.norm2(&f) - a).abs() / a.max(1e-300))
    }

    /// Residual of (F_k(x))* = F_k(y) where y = γ₀(x*) at k = 1 and y = ρ₂(x)* at k = 2; the
    /// mirroring is evaluated by the quasi-basis formula, independently of F_k.
    pub fn adjoint_rule_defect(&self, k: usize, x: &CMatrix) -> Result<f64> {
        let lhs = self.fourier(k, x)?.adjoint();
        let y = match k {
            1 => self.rotation_by_basis(1, &x.adjoint())?,
            2 => self.rotation_by_basis(2, x)?.adjoint(),
            _ => return Err(Error::DepthLimit { requested: k, limit: 2 }),
        };
        let rhs = self.fourier(k, &y)?;
        Ok(rel(&lhs, &rhs))
    }
}
