use thiserror::Error;

pub type Result<T> = std::result::Result<T, GreedyError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreedyError {
    #[error("column {0} has (near) zero empirical norm")]
    DegenerateColumn(usize),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("sufficient statistics were built with different standardization scales")]
    ScaleMismatch,

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("design needs at least one row and one column")]
    EmptyDesign,

    #[error("{subsets} subsets exceed the enumeration cap of {cap}")]
    CombinatorialBlowup { subsets: u128, cap: u128 },

    #[error("every regressor is excluded from selection")]
    AllExcluded,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degrees of freedom for {0} need the n-space design, not only sufficient statistics")]
    NeedsRawDesign(&'static str),

    #[error("AICc undefined: (df + 2) / n = ({df} + 2) / {n} >= 1")]
    AiccUndefined { df: f64, n: usize },

    #[error("information criterion needs rss_n > 0, got {0}")]
    NonPositiveRss(f64),

    #[error("path is empty")]
    EmptyPath,

    #[error("step {step} is beyond the path length {len}")]
    StepOutOfRange { step: usize, len: usize },

    #[error("fold {0} has no rows")]
    EmptyFold(usize),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Gram submatrix is numerically singular (smallest eigenvalue {0:e})")]
    Singular(f64),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GreedyError {
    fn from(e: std::io::Error) -> Self {
        GreedyError::Io(e.to_string())
    }
}
