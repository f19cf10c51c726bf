use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by corpus handling, the encoder, training and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: malformed corpus line: {msg}")]
    MalformedLine { line: usize, msg: String },

    #[error("line {line}: duplicate document id {id:?}")]
    DuplicateDocId { line: usize, id: String },

    #[error("line {line}: summary references unknown doc_id {id:?}")]
    UnknownDocId { line: usize, id: String },

    #[error("line {line}: {msg}")]
    InvalidRecord { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("cannot halve a single-sentence abstract")]
    CannotHalve,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty token sequence")]
    EmptyTokens,

    #[error("token index {index} out of range (vocab size {size})")]
    TokenOutOfRange { index: usize, size: usize },

    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("missing match key {key:?} in candidate pool")]
    MissingMatchKey { key: String },

    #[error("duplicate key {key:?} in embedding set")]
    DuplicateKey { key: String },

    #[error("zero-norm embedding for key {key:?} under cosine distance")]
    ZeroNormEmbedding { key: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("{0}")]
    Evaluation(String),

    #[error("training error: {0}")]
    Training(String),
}
