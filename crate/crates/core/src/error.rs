//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of inputs are inconsistent with each other or with the operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A parameter is outside its documented range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input matrix does not have the requested numerical rank.
    #[error("rank-deficient input: effective rank {effective_rank}, requested {requested}")]
    RankDeficient {
        effective_rank: usize,
        requested: usize,
    },

    /// A numerical routine produced non-finite values or failed to factorize.
    #[error("numerical error{}: {message}", iteration.map(|k| format!(" at iteration {k}")).unwrap_or_default())]
    Numerical {
        message: String,
        iteration: Option<usize>,
    },

    /// Malformed or unreadable data (file formats, manifests, frames).
    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn numerical(msg: impl Into<String>, iteration: Option<usize>) -> Self {
        Error::Numerical {
            message: msg.into(),
            iteration,
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
