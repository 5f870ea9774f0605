use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite numeric input: {0}")]
    NumericInput(String),

    #[error("algebra mismatch: expected blocks {expected:?}, found {found:?}")]
    AlgebraMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("kernel table has no entry for pair ({x}, {y})")]
    Incomplete { x: String, y: String },

    #[error("Hermitian symmetry violated for pair ({x}, {y}): residual {residual:e}")]
    Symmetry { x: String, y: String, residual: f64 },

    #[error("reference unit {0:?} is not a label of the system")]
    Reference(String),

    #[error("unknown unit label {0:?}")]
    UnknownLabel(String),

    #[error("duplicate unit label {0:?}")]
    DuplicateLabel(String),

    #[error("combination coefficients do not sum to the unit (residual {residual:e})")]
    Normalization { residual: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("Gram realization is not positive: eigenvalue {min_eigenvalue:e}")]
    Positivity { min_eigenvalue: f64 },

    #[error("positivity witness is not positive: eigenvalue {min_eigenvalue:e}")]
    NotCpd { min_eigenvalue: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error: {0}")]
    Parse(String),
}
