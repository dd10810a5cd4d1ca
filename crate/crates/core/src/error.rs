use thiserror::Error;

/// Everything that can go wrong in the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("variable index {index} out of range for arity {arity}")]
    VarIndex { index: usize, arity: usize },
    #[error("divisor polynomial is zero or a unit")]
    BadDivisor,
    #[error("exponent overflow")]
    Overflow,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("expression too large")]
    TooLarge,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("context mismatch between summands")]
    ContextMismatch,
    #[error("inadmissible center: {0}")]
    Inadmissible(String),
    #[error("no maximal contact: {0}")]
    MaximalContact(String),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("step budget of {0} blow-ups exceeded")]
    Budget(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
