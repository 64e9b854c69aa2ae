use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("monotonicity error: {0}")]
    Monotonicity(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("order error: {0}")]
    Order(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("instance too large: {0}")]
    Scale(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
