use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TodaError {
    #[error("cannot parse diagram id `{0}` (expected <family><rank>~<twist>, e.g. a3~2)")]
    Parse(String),
    #[error("illegal diagram {0}")]
    IllegalDiagram(String),
    #[error("invalid labelling: {0}")]
    InvalidLabelling(String),
    #[error("invalid Toda pair: {0}")]
    InvalidPair(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not a principal pair: {0}")]
    NotPrincipalPair(String),
    #[error("data is not invariant under the permutation: {0}")]
    NonInvariant(String),
    #[error("singular Jacobian (condition estimate {condition:.3e})")]
    SingularJacobian { condition: f64 },
    #[error("arithmetic overflow in exact computation: {0}")]
    Overflow(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, TodaError>;
