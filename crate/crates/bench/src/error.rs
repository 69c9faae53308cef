use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: {message}")]
    Domain { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown problem `{0}` (see `list-problems`)")]
    UnknownProblem(String),

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed CSV: {0}")]
    Table(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Solver(#[from] pdalm::Error),
}

impl BenchError {
    /// Process exit code: 1 for problems with the user's input, 2 for
    /// everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Parse { .. }
            | BenchError::Domain { .. }
            | BenchError::Config(_)
            | BenchError::UnknownProblem(_)
            | BenchError::Usage(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
