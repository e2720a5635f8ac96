use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed graph: {0}")]
    Graph(String),
    #[error("homomorphism violation: {0}")]
    HomomorphismViolation(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("cover violation: {0}")]
    CoverViolation(String),
    #[error("level {requested} out of range (available up to {available})")]
    DepthOutOfRange { requested: usize, available: usize },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("residual marker condition undetermined within horizon {0}")]
    HorizonExceeded(usize),
    #[error("mono-graph is not straight: {0}")]
    NotStraight(String),
    #[error("no continuous successor resolution: {0}")]
    UndefinedVershik(String),
    #[error("nesting violation at level {level}: {detail}")]
    NestingViolation { level: usize, detail: String },
    #[error("substitution has no growing letter")]
    EmptyGrowingSet,
    #[error("illegal seed row: {0}")]
    IllegalSeed(String),
    #[error("unsupported document kind: {0}")]
    UnsupportedKind(String),
    #[error("length overflow while propagating edge lengths")]
    LengthOverflow,
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
