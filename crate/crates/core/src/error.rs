use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("scope error: variable `{var}` in `{construct}`: {reason}")]
    Scope {
        var: String,
        construct: String,
        reason: String,
    },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("`{construct}` is not available under the {monad} monad")]
    IllegalEffect { construct: String, monad: String },
    #[error("monad mismatch: expected {expected}, found {found}")]
    MonadMismatch { expected: String, found: String },
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
    #[error("chain is not ascending at position {0}")]
    NotAscending(usize),
    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),
    #[error("carrier too large: {0}")]
    CarrierTooLarge(String),
    #[error("no shipped algebra for monad {monad} with truth lattice {lattice}")]
    NoAlgebra { monad: String, lattice: String },
    #[error("fixpoint iteration did not stabilize: {0}")]
    NoConvergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}
