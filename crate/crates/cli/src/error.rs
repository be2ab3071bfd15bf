use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },

    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: String, message: String },

    #[error("{path}: {inner}")]
    InFile { path: PathBuf, inner: Box<CliError> },

    #[error(transparent)]
    Core(#[from] specshift::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn in_file(self, path: &Path) -> Self {
        CliError::InFile {
            path: path.to_path_buf(),
            inner: Box::new(self),
        }
    }
}
