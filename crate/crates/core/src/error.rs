use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column}: cannot parse {value:?} as a finite number")]
    BadCell {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("label column {0} not found")]
    MissingLabelColumn(String),

    #[error("dataset has {found} distinct class(es); at least 2 are required")]
    TooFewClasses { found: usize },

    #[error("class {class} has a single sample; both splits cannot contain it")]
    ClassTooSmall { class: usize },

    #[error("unknown {what}: {name:?}")]
    Unknown { what: &'static str, name: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("index {0} was already queried from the oracle")]
    AlreadyQueried(usize),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
