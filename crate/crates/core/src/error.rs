use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes. The CLI maps these onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Config,
    Data,
    Divergence,
    Io,
    Contract,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("axis `{axis}`: {message}")]
    Domain { axis: String, message: String },

    #[error("bucket id {index} out of range (K = {count})")]
    BucketIndex { index: usize, count: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no probe carries weight at the requested point (bucket {bucket:?})")]
    EmptyBucket { bucket: Option<usize> },

    #[error("idx parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("generator failed in bucket {bucket}: {source}")]
    Generator {
        bucket: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("training diverged at iteration {iteration} (loss = {loss})")]
    Divergence { iteration: u64, loss: f64 },

    #[error("degenerate statistics: {0}")]
    Degenerate(String),

    #[error("config error at {key} (line {line}): {message}")]
    Config {
        key: String,
        line: usize,
        message: String,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(key: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            line,
            message: message.into(),
        }
    }

    pub fn category(&self) -> Category {
        match self {
            Error::Config { .. } => Category::Config,
            Error::Parse { .. } | Error::Data(_) | Error::Generator { .. } | Error::EmptyBucket { .. } => {
                Category::Data
            }
            Error::Divergence { .. } => Category::Divergence,
            Error::Io { .. } | Error::Csv(_) | Error::Json(_) | Error::Checkpoint(_) => Category::Io,
            Error::Domain { .. }
            | Error::BucketIndex { .. }
            | Error::Contract(_)
            | Error::Degenerate(_) => Category::Contract,
        }
    }
}
