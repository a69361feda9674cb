use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("vector contains a non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("dimension must be at least 2, got {0}")]
    TooFewDimensions(usize),
    #[error("vector is off the unit sphere: |norm^2 - 1| = {residual:e}")]
    NotUnitNorm { residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("objective returned non-finite value {0} at the incumbent")]
    NonFiniteObjective(f64),
    #[error("class {0} is empty")]
    EmptyClass(usize),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("all pooled scores are identical at boundary {0}")]
    DegenerateScores(usize),
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("no starting points supplied")]
    NoStarts,
}
