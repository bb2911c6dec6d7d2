//! Finite-dimensional index theory: inclusions of multi-matrix algebras, conditional
//! expectations, the Jones tower, Fourier transforms on relative commutants,
//! biprojections, angles between intermediates and intermediate lattices.

pub mod angles;
pub mod biproj;
pub mod expect;
pub mod fourier;
pub mod lattice;
pub mod models;
pub mod numkernel;
pub mod report;
pub mod rng;
pub mod staralg;
pub mod suites;
pub mod tower;

pub use numkernel::{c, herm_eig, nullspace, orthonormalize, psd_root_pinv, CMatrix, Eig, InnerProduct, C64};
pub use report::{Check, Report, Status};
pub use staralg::{Algebra, BlockData, InclusionPair};
pub use expect::{CondExp, TraceState};
pub use tower::Tower;
pub use models::{Model, ModelSpec};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: {0}")]
    NonHermitian(String),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("subalgebra is not contained in the ambient algebra (residual {0:.3e})")]
    NotNested(f64),
    #[error("block structure could not be rounded: {0}")]
    InconsistentBlocks(String),
    #[error("not a projection (residual {0:.3e})")]
    NotProjection(f64),
    #[error("element is not in the relative commutant (residual {0:.3e})")]
    NotInCommutant(f64),
    #[error("functional is not faithful")]
    NotFaithful,
    #[error("trace is not Markov for this inclusion (total mass {0})")]
    NotMarkov(f64),
    #[error("no conditional expectation passed the minimality certificate: {0}")]
    CertificateFailure(String),
    #[error("tower depth {requested} exceeds the limit {limit}")]
    DepthLimit { requested: usize, limit: usize },
    #[error("not a biprojection: {0}")]
    NotBiprojection(String),
    #[error("representation failure: {0}")]
    RepresentationFailure(String),
    #[error("bad model spec: {0}")]
    BadSpec(String),
    #[error("degenerate leg: {0}")]
    DegenerateLeg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Relative tolerance for equality of operators.
    pub const OPERATOR: f64 = 1e-9;
    /// Eigenvalues within this of {0,1} count as a projection.
    pub const PROJECTION: f64 = 1e-8;
    /// Antihermitian mass allowed on input to the eigensolver.
    pub const HERMITIAN: f64 = 1e-12;
    pub const JACOBI_OFFDIAG: f64 = 1e-13;
    /// Eigenvalues below this times the largest are treated as zero in pseudo-inverses.
    pub const PINV_CUTOFF: f64 = 1e-10;
    pub const PSD_FLOOR: f64 = 1e-8;
    /// Singular values below this times the largest span a nullspace.
    pub const NULL_CUTOFF: f64 = 1e-7;
    /// Gram-Schmidt drops residuals below this times the largest input norm.
    pub const DROP: f64 = 1e-9;
    /// Near-integer rounding for block dimensions and multiplicities.
    pub const ROUNDING: f64 = 1e-6;
    pub const QUASI_BASIS: f64 = 1e-8;
    pub const INDEX: f64 = 1e-6;
    pub const SUBSPACE: f64 = 1e-6;
    pub const DEFAULT_SEED: u64 = 0xC57A;
    pub const NODE_CAP: usize = 10_000;
    pub const MAX_DEPTH: usize = 3;
    pub const KK_ITERATIONS: usize = 200;
    pub const PP_SAMPLES: usize = 2000;

    /// The ledger as (name, value) pairs, embedded in reports.
    pub fn ledger() -> Vec<(&'static str, f64)> {
        vec![
            ("operator", OPERATOR),
            ("projection", PROJECTION),
            ("jacobi_offdiag", JACOBI_OFFDIAG),
            ("pinv_cutoff", PINV_CUTOFF),
            ("null_cutoff", NULL_CUTOFF),
            ("rounding", ROUNDING),
            ("quasi_basis", QUASI_BASIS),
            ("index", INDEX),
            ("subspace", SUBSPACE),
        ]
    }
}
