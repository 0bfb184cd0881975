use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("instance is not a unit (0/1) instance: {0}")]
    NotUnit(String),

    #[error("instance is not bivalued: agent {agent} has {distinct} distinct utility values")]
    NotBivalued { agent: usize, distinct: usize },

    /// No unit-size bundle costs at most one dollar.
    #[error("infeasible prices: every price exceeds 1")]
    InfeasiblePrices,

    #[error("bundle is not optimal (gap {gap})")]
    NotOptimal { gap: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An internal invariant of a solver failed. Always a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),
}
