use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("not a density operator: {0}")]
    InvalidState(String),

    #[error(
        "channel '{label}' is not CPTP (completeness residual {completeness:.3e}, Choi min eigenvalue {choi_min:.3e})"
    )]
    NotCptp { label: String, completeness: f64, choi_min: f64 },

    #[error("channel '{0}' has not been validated")]
    Unvalidated(String),

    #[error("post-selection impossible: outcome probability {0:.3e}")]
    PostSelectionImpossible(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
