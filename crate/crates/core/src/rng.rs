//! Seeded randomness. Every random routine takes an explicit seed.

use crate::numkernel::{c, CMatrix, C64};
use crate::tol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rand = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed from CSTAR_SEED (decimal or 0x-hex), else the default.
pub fn default_seed() -> u64 {
    std::env::var("CSTAR_SEED").ok().and_then(|s| parse_seed(&s)).unwrap_or(tol::DEFAULT_SEED)
}

pub fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16).ok(),
        None => s.parse().ok(),
    }
}

pub fn gaussian(r: &mut Rand) -> f64 {
    // Box-Muller
    let u1: f64 = r.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn complex_gaussian(r: &mut Rand) -> C64 {
    c(gaussian(r), gaussian(r)) / std::f64::consts::SQRT_2
}

/// Random complex combination of the given basis.
pub fn combination(r: &mut Rand, basis: &[CMatrix]) -> CMatrix {
    let n = basis.first().map_or(0, |b| b.rows());
    let mut out = CMatrix::zeros(n, n);
    for b in basis {
        out.axpy(complex_gaussian(r), b);
    }
    out
}

/// Random Hermitian element of the real span of {b + b*, i(b - b*)}.
pub fn hermitian_combination(r: &mut Rand, basis: &[CMatrix]) -> CMatrix {
    let n = basis.first().map_or(0, |b| b.rows());
    let mut out = CMatrix::zeros(n, n);
    for b in basis {
        let bs = b.adjoint();
        out.axpy(c(gaussian(r), 0.0), &(b + &bs));
        out.axpy(c(0.0, gaussian(r)), &(b - &bs));
    }
    out
}

pub fn random_matrix(r: &mut Rand, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(0.0, 0.0)).map_entries(|_| complex_gaussian(r))
}

pub fn random_hermitian(r: &mut Rand, n: usize) -> CMatrix {
    random_matrix(r, n, n).hermitian_part()
}
