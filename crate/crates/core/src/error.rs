use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OplabError {
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("spectral precondition violated: {0}")]
    Spectral(String),

    #[error("not a contraction: norm {norm:.6e} exceeds 1")]
    NotContraction { norm: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("interpolation infeasible: {0}")]
    Infeasible(String),

    #[error("columns do not form a basis: {0}")]
    NotABasis(String),

    #[error("spectra overlap (gap {gap:.3e}); Sylvester equation is ill-posed")]
    SpectraOverlap { gap: f64 },

    #[error("kernel is trivial: {0}")]
    EmptyKernel(String),

    #[error("shift dimension too small: {0}")]
    ShiftTooSmall(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, OplabError>;

impl From<std::io::Error> for OplabError {
    fn from(e: std::io::Error) -> Self {
        OplabError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for OplabError {
    fn from(e: serde_json::Error) -> Self {
        OplabError::Format(e.to_string())
    }
}
