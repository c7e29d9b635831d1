use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime below 2^31")]
    InvalidPrime(u64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Pfaffian of an odd-dimensional ({0}) skew form")]
    OddDimension(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("shape violation: {0}")]
    Shape(String),
    /// The input is not generic enough for the construction; callers resample.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("interpolation failed: {0}")]
    Interpolation(String),
    #[error("point is not on the locus: {0}")]
    NotOnLocus(String),
    #[error("budget exceeded: {needed} membership tests requested, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("unknown check id `{0}`")]
    UnknownCheck(String),
    #[error("malformed trivector file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
