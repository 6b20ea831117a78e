use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("evaluation failed at lambda = {lambda}: {msg}")]
    Evaluation { lambda: f64, msg: String },

    #[error("not integrable: {0}")]
    NotIntegrable(String),

    #[error("quadrature did not converge: worst panel [{a}, {b}], achieved bound {bound:e}")]
    Quadrature { a: f64, b: f64, bound: f64 },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("trigonometric polynomial is negative at lambda = {witness} (value {value:e})")]
    Negative { witness: f64, value: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("inequality violated: {0}")]
    Violation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
