use thiserror::Error;

/// Errors produced by the decoder library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unknown code `{0}` (known: ebch_256_239, ebch_32_21)")]
    UnknownCode(String),

    #[error("unsupported code parameters: {0}")]
    UnsupportedCode(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("variant `{variant}` requires {what}")]
    MissingInput {
        variant: &'static str,
        what: &'static str,
    },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
