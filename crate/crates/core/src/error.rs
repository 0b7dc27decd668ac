use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("unbalanced occupations: rows carry {rows} particles, columns carry {cols}")]
    Unbalanced { rows: usize, cols: usize },
    #[error("flavor mismatch: {0}")]
    FlavorMismatch(String),
    #[error("vectors are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("factor {factor} has indefinite particle parity")]
    IndefiniteParity { factor: usize },
    #[error("unsupported state: {0}")]
    Unsupported(String),
    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
