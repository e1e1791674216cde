use thiserror::Error;

pub type Result<T, E = SoftError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SoftError {
    #[error("invalid parameter set: {0}")]
    InvalidParameterSet(String),

    #[error("parameter sets differ: {left:?} vs {right:?}")]
    ParameterMismatch { left: Vec<String>, right: Vec<String> },

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("block structure mismatch: {0}")]
    BlockMismatch(String),

    #[error("operator is not Hermitian at parameter `{label}` (defect {defect:e})")]
    NotHermitian { label: String, defect: f64 },

    #[error("operator is not positive definite at parameter `{label}`")]
    NotPositiveDefinite { label: String },

    #[error("not a frame at parameter(s) {labels:?}")]
    NotAFrame { labels: Vec<String> },

    #[error("precondition violated: {0}")]
    Precondition(String),
}
