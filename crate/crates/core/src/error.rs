//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by callers that map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: missing files, malformed records, invalid flags or values.
    User,
    /// Unexpected internal state: numerical blowups, broken invariants.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("no translation for sentence: {0:?}")]
    MissingTranslation(String),

    #[error("translation changed the sentence count ({got} sentences, expected {expected})")]
    Misaligned { expected: usize, got: usize },

    #[error("document {0:?} has no sentences left after token-budget truncation")]
    TokenBudget(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("training loss became non-finite on document {0:?}")]
    NanLoss(String),

    #[error("no selection provided for document {0:?}")]
    MissingSelection(String),

    #[error("checkpoint does not match the expected model configuration: {0}")]
    ConfigMismatch(String),
}

impl Error {
    pub fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Invalid(_)
            | Error::MissingTranslation(_)
            | Error::Misaligned { .. }
            | Error::TokenBudget(_)
            | Error::MissingSelection(_)
            | Error::ConfigMismatch(_) => ErrorKind::User,
            Error::NonFinite(_) | Error::NanLoss(_) => ErrorKind::Internal,
        }
    }
}
