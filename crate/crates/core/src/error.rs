use thiserror::Error;

use crate::sdp::SdpSolution;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max |M - M*| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("eigensolver failed: reconstruction residual {residual:.3e}")]
    Eigen { residual: f64 },

    #[error("map is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "solver hit the iteration cap ({iterations}) with gap {:.3e}, primal residual {:.3e}, dual residual {:.3e}",
        best.residuals.relative_gap, best.residuals.primal_infeasibility, best.residuals.dual_infeasibility
    )]
    MaxIterations {
        iterations: usize,
        best: Box<SdpSolution>,
    },

    #[error("linear system in the Newton step is singular")]
    Singular,

    #[error("problem too large for dense assembly: {0}")]
    SizeGuard(String),

    #[error("routes disagree: {0}")]
    RouteMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
