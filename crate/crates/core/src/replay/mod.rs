//! Prioritized experience replay backed by a sum tree.

mod buffer;
mod sum_tree;

use thiserror::Error;

pub use buffer::{importance_weights, PerConfig, PriorityBuffer, SampleIndex, SampledBatch, Transition};
pub use sum_tree::SumTree;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("cannot sample from an empty buffer")]
    Empty,
    #[error("invalid replay configuration: {0}")]
    Config(String),
    #[error("observation has length {got}, buffer expects {expected}")]
    ObservationLength { expected: usize, got: usize },
}
