use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },
    #[error("band limit violated: band {band} must stay below {limit}")]
    Band { band: usize, limit: usize },
    #[error("degenerate test function: {0}")]
    Degenerate(String),
    #[error("ill-conditioned computation: {0}")]
    Conditioning(String),
    #[error("requested accuracy unattainable: {0}")]
    Accuracy(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
