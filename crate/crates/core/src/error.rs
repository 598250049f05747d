use thiserror::Error;

use crate::features::TierAssignment;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: u64, msg: String },

    #[error("parse error on line {line}: {msg}")]
    Line { line: usize, msg: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("montage error: {0}")]
    Montage(String),

    #[error("filter design error: {0}")]
    Design(String),

    #[error("length error: {0}")]
    Length(String),

    /// Fewer than three distinct energies; the fallback groups equal
    /// values into as many tiers as there are distinct levels.
    #[error("degenerate clustering input: {msg}")]
    Degenerate {
        msg: String,
        fallback: Box<TierAssignment>,
    },

    #[error("render error: {0}")]
    Render(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("normalization error: {0}")]
    Norm(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("context error: {0}")]
    Context(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("invalid recording: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(offset: u64, msg: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            msg: msg.into(),
        }
    }
}
