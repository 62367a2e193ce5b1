//! Parallel execution, file formats, experiment configuration and the runner
//! behind the `lilfields` command.

pub mod config;
pub mod formats;
pub mod par;
pub mod run;

pub use config::{ExperimentConfig, ExperimentTag, Format};
pub use par::Pool;
pub use run::{run, Artifact};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failures of a run, each with its process exit status.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 64,
            RunError::Validation(_) => 2,
            RunError::Numeric(_) => 3,
            RunError::Io(_) => 74,
        }
    }
}

impl From<lilfields_core::Error> for RunError {
    fn from(e: lilfields_core::Error) -> Self {
        match e {
            lilfields_core::Error::Construction(_) => RunError::Numeric(e.to_string()),
            _ => RunError::Validation(e.to_string()),
        }
    }
}
