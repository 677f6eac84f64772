use thiserror::Error;

use crate::dataset::SolvencyClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// CSV ingestion failure. `row` is the 1-based line number in the file
    /// (the header is line 1).
    #[error("parse error at row {row}{}: {message}", column.as_ref().map(|c| format!(", column {c}")).unwrap_or_default())]
    Csv {
        row: usize,
        column: Option<String>,
        message: String,
    },

    #[error("model parse error at line {line}: {message}")]
    ModelParse { line: usize, message: String },

    #[error("invalid state: {0}")]
    State(String),

    #[error("cannot sample class {class}: {message}")]
    Sampling {
        class: SolvencyClass,
        message: String,
    },

    #[error("class {class} has {count} record(s); at least 2 are needed to synthesize")]
    InsufficientClass { class: SolvencyClass, count: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn csv(row: usize, column: Option<&str>, message: impl Into<String>) -> Self {
        Error::Csv {
            row,
            column: column.map(str::to_owned),
            message: message.into(),
        }
    }
}
