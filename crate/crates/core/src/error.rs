use thiserror::Error;

/// Errors raised by the library. Normal negative outcomes (incomparable
/// functions, failed law checks, distinct types) are values, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("relation is not a strict partial order: {0}")]
    NotStrictOrder(String),

    #[error("no upper bound for ({0}, {1})")]
    NotDirected(String, String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("alphabet exhausted: {requested} symbols requested, limit is {limit}")]
    AlphabetExhausted { requested: usize, limit: usize },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("dangling reference to `{0}`")]
    DanglingName(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("oracle inconsistency: {0}")]
    OracleInconsistency(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
