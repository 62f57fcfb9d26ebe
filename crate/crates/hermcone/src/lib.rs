//! Bounded complexes of finite-dimensional hermitian spaces, their
//! determinant-norm invariant, hermitian cones in the derived category of a
//! point, genus power series and a toy category of smooth morphisms.

pub mod acyccalc;
pub mod derived;
pub mod gen;
pub mod genera;
pub mod hermlin;
pub mod linalg;
pub mod osm;
pub mod torsion;
pub mod verify;

use thiserror::Error;

/// Numerical tolerances. `Tolerances::default()` is used unless a caller
/// overrides (the CLI's `--tol` replaces `tau_tol`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Smallest admissible Cholesky pivot.
    pub pd_tol: f64,
    /// Relative Frobenius tolerance for d∘d = 0 and chain-map checks.
    pub chain_tol: f64,
    /// Rank threshold relative to the largest singular value.
    pub rank_rel: f64,
    /// Absolute floor under the rank threshold.
    pub rank_floor: f64,
    /// Meagerness / tightness decisions.
    pub tau_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { pd_tol: 1e-10, chain_tol: 1e-9, rank_rel: 1e-8, rank_floor: 1e-13, tau_tol: 1e-8 }
    }
}

pub const TOL: Tolerances =
    Tolerances { pd_tol: 1e-10, chain_tol: 1e-9, rank_rel: 1e-8, rank_floor: 1e-13, tau_tol: 1e-8 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("complex is not acyclic: H^{degree} has dimension {dim}")]
    NotAcyclic { degree: i32, dim: usize },
    #[error("ambiguous rank decision in degree {degree}: singular value {value:e} near threshold {threshold:e}")]
    AmbiguousRank { degree: i32, value: f64, threshold: f64 },
    #[error("near-singular differential in degree {degree}: singular value {value:e}")]
    NearSingular { degree: i32, value: f64 },
    #[error("not a quasi-isomorphism: {0}")]
    NotQuasiIso(String),
    #[error("homotopy witness fails with residual {0:e}")]
    HomotopyWitness(f64),
    #[error("not orthogonally split: {0}")]
    NotSplit(String),
    #[error("series domain violation: {0}")]
    Domain(String),
    #[error("rank collapse in degree {degree} during generator reduction")]
    RankCollapse { degree: i32 },
    #[error("triangle is not distinguished: {0}")]
    NotDistinguished(String),
    #[error("endpoint mismatch: {0}")]
    Mismatch(String),
}

impl Error {
    /// Input could not be accepted as a well-formed object.
    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Error::Shape(_) | Error::Invalid(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
