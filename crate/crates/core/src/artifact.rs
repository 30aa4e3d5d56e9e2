//! Errors for on-disk artifact exchange (mutant directories, suite
//! directories) plus small read/write helpers shared by those modules.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::text::SyntaxError;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Syntax {
        path: PathBuf,
        #[source]
        source: SyntaxError,
    },
    #[error("mutant set at {dir} was not generated from the given original policy")]
    OriginalMismatch { dir: PathBuf },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, ArtifactError> {
    fs::read_to_string(path).map_err(|source| ArtifactError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_string(path: &Path, contents: &str) -> Result<(), ArtifactError> {
    fs::write(path, contents).map_err(|source| ArtifactError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn create_dir_all(path: &Path) -> Result<(), ArtifactError> {
    fs::create_dir_all(path).map_err(|source| ArtifactError::Io { path: path.to_path_buf(), source })
}
