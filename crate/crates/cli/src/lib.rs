//! Batch pipelines over `conjoint-core`: ingest ratings, build designs,
//! simulate and fit choices, split respondents, train the factor model and
//! render tables. Every command writes its outputs plus a manifest into the
//! output directory.

pub mod args;
pub mod commands;
pub mod manifest;

use std::path::{Path, PathBuf};

use conjoint_core::ErrorKind;
use thiserror::Error;

pub use args::{Cli, Command, GlobalArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] conjoint_core::Error),

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: conjoint_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{} does not match {}: {reason}", first.display(), second.display())]
    Mismatch {
        first: PathBuf,
        second: PathBuf,
        reason: String,
    },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 for I/O, 3 for invalid input, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        let kind = match self {
            CliError::Core(e) | CliError::InFile { source: e, .. } => e.kind(),
            CliError::Io { .. } => ErrorKind::Io,
            CliError::Config(_) | CliError::Mismatch { .. } | CliError::Usage(_) => ErrorKind::Validation,
        };
        match kind {
            ErrorKind::Io => 2,
            ErrorKind::Validation => 3,
            ErrorKind::Numerical => 4,
        }
    }

    pub(crate) fn in_file(path: &Path) -> impl FnOnce(conjoint_core::Error) -> CliError + '_ {
        move |source| match source {
            conjoint_core::Error::Io(e) => CliError::Io {
                path: path.to_path_buf(),
                source: e,
            },
            other => CliError::InFile {
                path: path.to_path_buf(),
                source: other,
            },
        }
    }
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<commands::Outcome> {
    let (global, command) = args::resolve(cli)?;
    commands::dispatch(&global, command)
}
