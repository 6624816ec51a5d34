use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The network or a path/flow on it is malformed.
    #[error("structural error: {0}")]
    Structural(String),

    /// A constructor or operation received parameters outside its domain.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("invalid function: {0}")]
    Function(String),

    #[error("instance too large for path enumeration: more than {cap} s-t paths")]
    TooManyPaths { cap: usize },

    #[error("division by zero: {0}")]
    ZeroDenominator(String),

    /// No alternating path exists for an equilibrium pair. Existence is
    /// guaranteed for genuine equilibria, so this flags bad input flows.
    #[error("no alternating s-t path exists: {0}")]
    NoAlternatingPath(String),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
