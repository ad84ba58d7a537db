use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimacs line {line}: {msg}")]
    Dimacs { line: usize, msg: String },

    #[error("variable index {index} out of range for {n_vars} variables")]
    VarOutOfRange { index: usize, n_vars: usize },

    #[error("empty clause")]
    EmptyClause,

    #[error("variable {0} appears twice in one constraint")]
    DuplicateVariable(usize),

    #[error("clause count mismatch: header declares {declared}, found {found}")]
    ClauseCount { declared: usize, found: usize },

    #[error("exactly-one group {0} is empty")]
    EmptyGroup(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("enumeration cap exceeded: {needed} variables, cap is {cap}")]
    CapExceeded { needed: usize, cap: usize },

    #[error("constraint set is unsatisfiable")]
    Unsatisfiable,

    #[error("non-finite weight at variable {0}")]
    NonFinite(usize),

    #[error("interaction over {0} variables; only linear and pairwise terms are supported")]
    HigherOrder(usize),

    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    #[error("sampler exhausted: {got} of {wanted} valid rows after {batches} batches")]
    SamplerExhausted {
        got: usize,
        wanted: usize,
        batches: usize,
    },

    #[error("no valid initial assignment within the tryout limit")]
    NoValidInit,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("row {0} violates the constraints")]
    InvalidRow(usize),

    #[error("negative mass {0} in distribution table")]
    NegativeMass(f64),

    #[error("empty batch")]
    EmptyBatch,

    #[error("fewer than {needed} ranking candidates ({got})")]
    TooFewCandidates { needed: usize, got: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
