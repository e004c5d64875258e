use thiserror::Error;

/// Errors raised across the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("enumeration of {what} would produce {count} items, above the cap of {cap}")]
    ExplosionGuard {
        what: &'static str,
        count: u128,
        cap: u64,
    },

    #[error("linear program exceeded {pivots} pivots")]
    Capacity { pivots: usize },

    #[error("no-arbitrage violated at node `{node}` (certificate h = {certificate})")]
    NoArbitrageViolation { node: String, certificate: String },

    #[error("one-step super-hedging problem is unbounded below")]
    UnboundedBelow,

    #[error("martingale polytope is empty")]
    InfeasiblePolytope,

    #[error("no strictly feasible point exists")]
    NoPoint,

    #[error("mixing weight lambda = {0} must lie in (0, 1]")]
    LambdaOutOfRange(String),

    #[error("bad fixture parameter: {0}")]
    BadParameter(String),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
