use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("undecidable at tolerance: {0}")]
    Undecidable(String),
    #[error("inconclusive at tolerance {tol:e}: {detail}")]
    Inconclusive { tol: f64, detail: String },
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("unrealizable: {0}")]
    Unrealizable(String),
    #[error("nothing found: {0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
