use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("frequency {0} lies outside the resolved band {1}")]
    OutOfBand(f64, f64),
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("unknown registry entry: {0}")]
    UnknownEntry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
