use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("eigensolver failed to converge (input norm {norm:.3e})")]
    NonConvergence { norm: f64 },

    #[error("eigenvalue near {target} is degenerate ({count} matches within tolerance)")]
    DegenerateEigenvalue { target: num_complex::Complex64, count: usize },

    #[error("no eigenvalue within tolerance of {target}")]
    EigenvalueNotFound { target: num_complex::Complex64 },

    #[error("not a density matrix: {0}")]
    BadDensity(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("interaction period undefined: level splitting and coupling both vanish")]
    DegenerateResonance,

    #[error("spectral gate hypothesis violated: {0}")]
    GateViolation(String),

    #[error("distribution not supported in closed form: {0}")]
    UnsupportedDistribution(String),

    #[error("coupling too large for the perturbative block: {0}")]
    ThresholdViolation(String),

    #[error("unperturbed spectral gap too small: |lambda| = {lambda:.3e} >= r0/4 = {quarter_gap:.3e}")]
    GapTooSmall { lambda: f64, quarter_gap: f64 },
}
