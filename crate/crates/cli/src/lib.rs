//! Library half of the `nestmc` binary: config parsing, command
//! implementations, and CSV output. Kept as a lib so integration tests can
//! drive commands without spawning processes.

use std::path::PathBuf;

use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_audit, cmd_bench, cmd_run, Invocation};
pub use config::{load_config, ConfigError, ExperimentConfig};

/// Anything a command can fail with, tagged with the exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration: unreadable, unparsable, or semantically invalid.
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Csv {
        path: PathBuf,
        source: Box<csv::Error>,
    },
    #[error("{0}")]
    Engine(#[from] nestmc_core::EngineError),
    #[error("{0}")]
    Estimate(#[from] nestmc_core::EstimateError),
    #[error("{0}")]
    Cost(#[from] nestmc_core::OracleError),
    #[error("{0}")]
    Chain(#[from] nestmc_core::ChainError),
    /// The audit command found points outside their enclosing sets.
    #[error("audit found {violations} containment violations; see {path}")]
    AuditFailed { violations: usize, path: PathBuf },
}

impl CliError {
    /// Process exit code for this failure: 2 for configuration problems,
    /// 3 for a failed audit, 1 for everything else.
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::AuditFailed { .. } => 3,
            _ => 1,
        }
    }
}
