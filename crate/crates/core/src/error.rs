use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("enumeration of {needed} elements exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("non-integral result: {0}")]
    NonIntegral(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("formula not valid here: {0}")]
    Validity(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
