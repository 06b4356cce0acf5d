use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Solver,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("rows with missing values rejected ({})", format_counts(.counts))]
    MissingValues { counts: Vec<(String, usize)> },

    #[error("unknown category `{value}` in column `{column}` at row {row}")]
    UnknownCategory {
        row: usize,
        column: String,
        value: String,
    },

    #[error("literal `{0}` is not part of the literal universe")]
    UnknownLiteral(String),

    #[error("contradictory conjunction: {0}")]
    Contradiction(String),

    #[error("degenerate classification problem: {0}")]
    EmptyClass(String),

    #[error("coverage shortfall: covered {achieved} of {required} required rows")]
    CoverageShortfall { achieved: usize, required: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

fn format_counts(counts: &[(String, usize)]) -> String {
    counts
        .iter()
        .map(|(c, n)| format!("{c}: {n}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Schema(_) | Error::InvalidArgument(_) | Error::Serde(_) => ErrorKind::Config,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::MissingValues { .. }
            | Error::UnknownCategory { .. }
            | Error::UnknownLiteral(_)
            | Error::Contradiction(_)
            | Error::EmptyClass(_) => ErrorKind::Data,
            Error::CoverageShortfall { .. } | Error::Numerical(_) => ErrorKind::Solver,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
