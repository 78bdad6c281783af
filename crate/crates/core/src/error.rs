use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree cap exceeded: degree {degree} > cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("zero central parameter")]
    ZeroLambda,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("rotation is not unitary (defect {0:.3e})")]
    NonUnitary(f64),
    #[error("shift moves non-negligible mass off the sampling grid")]
    OutOfGrid,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("insufficient t extent: {0}")]
    TExtent(String),
    #[error("spectral data is not band-limited: {0}")]
    NotBandLimited(String),
    #[error("no admissible (k, lambda) cells for the requested band limit")]
    EmptyBand,
    #[error("truncation estimate above tolerance: {0}")]
    Truncation(String),
    #[error("unsupported dimension n = {n}: {what}")]
    Unsupported { n: usize, what: &'static str },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed container: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
