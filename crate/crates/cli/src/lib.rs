//! Verification runs over graph snapshots: configuration, the four
//! subcommands, and the JSON/CSV report writers.

pub mod config;
pub mod output;
pub mod report;
pub mod run;

use hyperschur::corridor::CorridorError;
use hyperschur::factorization::FactorError;
use hyperschur::graph::GraphError;
use hyperschur::kernel::KernelError;
use hyperschur::normlab::NormError;
use hyperschur::providers::ProviderError;
use thiserror::Error;

pub use config::{Cli, Command, RunConfig, Task};
pub use report::{exit, Report, Verdict, SCHEMA_VERSION};
pub use run::{cmd_all, cmd_norms, cmd_profile, cmd_verify, run, RunOutput};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Corridor(#[from] CorridorError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Solver non-convergence is inconclusive; everything else is treated
    /// as bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Norm(NormError::NotConverged { .. }) => exit::INCONCLUSIVE,
            _ => exit::INPUT_ERROR,
        }
    }
}
