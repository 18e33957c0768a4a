use thiserror::Error;

/// Failures raised while building or evaluating the homogenization pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate lattice basis: |det| = {det:e} below threshold {threshold:e}")]
    DegenerateBasis { det: f64, threshold: f64 },

    #[error("negative truncation cutoff {cutoff}")]
    EmptyTruncation { cutoff: f64 },

    #[error("symbol is rank deficient on the unit sphere: alpha0 = {alpha0:e}, alpha1 = {alpha1:e}")]
    RankDeficientSymbol { alpha0: f64, alpha1: f64 },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("coefficient is not positive definite: eigenvalue {min_eigenvalue:e} at x = {at:?}")]
    NotPositiveDefinite { min_eigenvalue: f64, at: Vec<f64> },

    #[error("cell system is numerically singular: {0}")]
    SingularCellSystem(String),

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("Voigt-Reuss bracketing violated: min eig(upper - g0) = {upper_gap:e}, min eig(g0 - lower) = {lower_gap:e}")]
    BracketingViolation { upper_gap: f64, lower_gap: f64 },

    #[error("degenerate germ: min eigenvalue {min_eigenvalue:e}")]
    DegenerateGerm { min_eigenvalue: f64 },

    #[error("threshold cluster has rank {found}, expected {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("data support exceeds the truncated frequency set: {0}")]
    SupportOverflow(String),

    #[error("time quadrature did not converge: relative change {relative_change:e} under step doubling")]
    QuadratureUnconverged { relative_change: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
