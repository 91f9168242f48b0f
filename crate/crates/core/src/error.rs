use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("circulant embedding failed: min eigenvalue {min_eigenvalue:e} below tolerance (max {max_eigenvalue:e})")]
    EmbeddingFailure {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:e} < {tolerance:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("degenerate process: {0}")]
    DegenerateProcess(String),

    #[error("epsilon {epsilon} too large: must not exceed {limit}")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },

    #[error("no feasible parameter tuple: {0}")]
    Infeasible(Infeasibility),

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),
}

/// The tightest violated constraint found while searching for a certificate.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Infeasibility {
    /// Human-readable constraint, e.g. `4 N^(1/p) <= I/eps`.
    pub constraint: String,
    /// Ratio `lhs / rhs` of the least-violated candidate (> 1 means violated).
    pub ratio: f64,
}

impl std::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (lhs/rhs = {})", self.constraint, self.ratio)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
