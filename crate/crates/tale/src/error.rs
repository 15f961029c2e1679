use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum TaleError {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("unsupported dimension {0}: {1}")]
    UnsupportedDimension(usize, &'static str),

    #[error("point outside chart domain: {0}")]
    DomainError(String),

    #[error("degenerate conformal factor: {0}")]
    DegenerateConformalFactor(String),

    #[error("numerical certificate failed: {0}")]
    CertificateFailed(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, TaleError>;
