//! Experiment orchestration: configuration, training, evaluation,
//! ablations, baselines and plot data.

pub mod config;
pub mod metrics;
pub mod plot;
mod runner;

use std::path::Path;

use thiserror::Error;

pub use config::{Archetype, RunConfig};
pub use metrics::{read_metrics, smooth, EpisodeRecord, MetricsWriter};
pub use plot::emit_plot_data;
pub use runner::{
    ablation_variants, run_ablation, run_baseline, run_eval, run_ft_sweep, run_training, scenario_flow, BaselineKind,
    EvalSummary, Scenario, TrainingOutput,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: u64, message: String },
    #[error("{0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Agent(#[from] crate::agent::AgentError),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }

    /// Process exit code: 2 for configuration and usage errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Usage(_) => 2,
            _ => 3,
        }
    }
}
