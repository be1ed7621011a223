//! Dense network engine: plain and noisy affine layers, a dueling
//! distributional head, hand-written backpropagation and Adam.

mod adam;
pub mod checkpoint;
mod network;
mod support;

use ndarray::{Array2, ArrayView3};
use thiserror::Error;

pub use adam::{AdamConfig, OptimizerState};
pub use checkpoint::{load_network, save_network, InputScaling};
pub use network::{ForwardPass, LayerDesc, LayerNoise, NetworkShape, NoiseState, QNetwork};
pub use support::Support;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("invalid network shape: {0}")]
    InvalidShape(String),
    #[error("input width {got}, network expects {expected}")]
    InputWidth { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("gradient has {got} entries, expected {expected}")]
    GradientLength { expected: usize, got: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Expected value of each action's atom distribution: `(batch, actions)`.
pub fn q_values(probs: ArrayView3<'_, f64>, support: &Support) -> Array2<f64> {
    let (b, a, n) = probs.dim();
    assert_eq!(n, support.len(), "distribution width must match the support");
    Array2::from_shape_fn((b, a), |(i, j)| (0..n).map(|k| support.atoms()[k] * probs[[i, j, k]]).sum())
}
