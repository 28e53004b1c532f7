use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("PGM parse error at byte {offset}: {message}")]
    Pgm { offset: usize, message: String },

    #[error("model file line {line}: {kind}")]
    ModelFile { line: usize, kind: ModelFileError },

    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("{file}: image is {found_h}x{found_w}, expected {expected_h}x{expected_w}")]
    MixedDimensions {
        file: String,
        expected_h: usize,
        expected_w: usize,
        found_h: usize,
        found_w: usize,
    },

    #[error("{0}: no PGM images found")]
    EmptyDataset(PathBuf),

    #[error("{0}")]
    Csv(String),

    #[error(transparent)]
    Model(#[from] gmface_core::Error),
}

/// What went wrong inside a model file.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelFileError {
    #[error("expected magic {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported version {0}")]
    VersionMismatch(String),
    #[error("header declares {declared} components but {found} records follow")]
    CountMismatch { declared: usize, found: usize },
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("cannot parse {0:?} as a number")]
    Number(String),
    #[error("component {index} violates model invariants: {reason}")]
    Invariant { index: usize, reason: String },
    #[error("unexpected end of file")]
    Truncated,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(path: impl Into<PathBuf>, err: Error) -> Self {
        match err {
            e @ Error::Io { .. } => e,
            e => Error::InFile {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }
}
