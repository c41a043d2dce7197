use thiserror::Error;

/// Errors surfaced by the library. Stage failures of the pipeline are not
/// errors; they are reported inside [`crate::pipeline::PipelineResult`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid arity: expected {expected}, got {got}")]
    InvalidArity { expected: String, got: usize },

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("repeated vertex {0} in tuple")]
    RepeatedVertex(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported size: {0}")]
    Unsupported(String),

    #[error("malformed witness: {0}")]
    MalformedWitness(String),

    #[error("degenerate partition: |A| = {a_size} with n = {n}")]
    DegeneratePartition { a_size: usize, n: usize },

    #[error("inapplicable regime: {0}")]
    InapplicableRegime(String),

    #[error("extension failed at step {step}: no admissible neighbour of end {end:?}")]
    ExtensionFailure { step: usize, end: Vec<usize> },

    #[error("no connector available for ends {from:?} -> {to:?}")]
    ConnectorShortfall { from: Vec<usize>, to: Vec<usize> },

    #[error("no unused absorber for block {0:?}")]
    NoAbsorber(Vec<usize>),

    #[error("path cover failed: {0}")]
    CoverFailure(String),

    #[error("corrupt absorber witness: {0}")]
    CorruptWitness(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
