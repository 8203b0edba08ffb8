use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing header column `{column}`")]
    MissingColumn { column: String },
    #[error("invalid {field}: {message}")]
    Date { field: &'static str, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parameter error: {0}")]
    Params(String),
    #[error("scoring error: {0}")]
    Scoring(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn date(field: &'static str, message: impl Into<String>) -> Self {
        Error::Date { field, message: message.into() }
    }

    /// Attaches a file path unless the error already names one.
    pub fn with_path(self, path: &Path) -> Self {
        match self {
            e @ (Error::Io { .. } | Error::InFile { .. }) => e,
            e => Error::InFile { path: path.to_path_buf(), source: Box::new(e) },
        }
    }
}
