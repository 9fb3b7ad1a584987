use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("torsion shape mismatch: expected {expected:?}, found {found:?}")]
    TorsionMismatch { expected: Vec<i64>, found: Vec<i64> },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("vertex budget exceeded ({budget} vertices)")]
    VertexBudget { budget: usize },

    #[error("isomorphism search budget exceeded ({budget} nodes)")]
    SearchBudget { budget: u64 },

    #[error("self-avoiding path cap exceeded: more than {cap} paths of length {m}")]
    SawCapExceeded { cap: usize, m: usize },

    #[error("rank {rank} is below 2: percolation threshold is 1")]
    RankTooSmall { rank: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("basis alignment violated: {0}")]
    BasisAlignment(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("search exhausted at stage {stage}: {detail}")]
    SearchExhausted { stage: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
