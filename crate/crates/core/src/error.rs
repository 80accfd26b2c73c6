use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("resolution: {0}")]
    Resolution(String),

    #[error(
        "eigensolver did not converge for eigenvalue {index} after {iterations} iterations \
         (frobenius norm {frobenius:.3e}, residual off-diagonal {offdiag:.3e})"
    )]
    NoConvergence { index: usize, iterations: usize, frobenius: f64, offdiag: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
