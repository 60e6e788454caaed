use crate::bits::Bits;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid partition system: {0}")]
    InvalidSystem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("string of length {len} exceeds top level {top}")]
    TooLong { len: usize, top: usize },

    #[error("length {len} is not a schedule level (expected one of {expected:?})")]
    NotALevel { len: usize, expected: Vec<usize> },

    #[error("level {level} exceeds the materialization limit {limit}")]
    TooLarge { level: usize, limit: usize },

    #[error("count has more than {bound} decimal digits")]
    DigitBound { bound: usize },

    #[error("coding failure at step {step}: no tree extension in class {class_bit}")]
    CodingFailure { step: usize, class_bit: u8 },

    #[error("two-extension property fails at node {witness}")]
    TwoExtension { witness: Bits },

    #[error("extension at step {step} is neither leftmost nor rightmost")]
    NotBoundary { step: usize },

    #[error("density precondition fails at node {node}: density {density} is not above {threshold}")]
    PreconditionOutOfRegime {
        node: Bits,
        density: String,
        threshold: String,
    },
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
