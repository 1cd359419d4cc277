use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("requested half-degree {requested} exceeds the configured maximum {max}")]
    Resource { requested: u32, max: u32 },

    #[error("truncation exceeded: {0}")]
    Truncation(String),

    /// Not enough Borel or coefficient precision to certify anything.
    #[error("precision exhausted: {message} (need {needed})")]
    Precision { message: String, needed: String },

    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),

    #[error("zero weight names the trivial character; its Euler class vanishes")]
    TrivialCharacter,

    #[error("malformed expression: {0}")]
    Malformed(String),

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
