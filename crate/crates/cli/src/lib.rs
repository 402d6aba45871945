//! Batch front-end for the stabilizer simulator: scenario files, trace CSVs,
//! comparison reports and rule-base dumps.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;

use std::io;
use std::path::PathBuf;

use pss_core::{MetricsError, SimError};
use thiserror::Error;

pub use config::{parse_scenario, parse_scenario_for, ConfigError, ScenarioFile};
pub use output::{parse_trace, read_trace, trace_csv, OutputError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Simulation(SimError),
    #[error("metrics failed: {0}")]
    Metrics(MetricsError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("expected controller ordering not reproduced:\n  {}", .violations.join("\n  "))]
    Ordering {
        report: String,
        violations: Vec<String>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ConfigRead { .. } | Self::Config(_) => 2,
            Self::Simulation(_) | Self::Metrics(_) => 3,
            Self::Output(_) => 4,
            Self::Ordering { .. } => 5,
        }
    }
}
