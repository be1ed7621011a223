//! Adaptive traffic signal control with a distributional, dueling,
//! double-Q network trained from prioritized replay with noisy exploration.
//!
//! The crate is organized bottom-up:
//!
//! - [`sim`]: single-intersection microsimulator (the RL environment)
//! - [`reward`]: action-based and episodic rewards
//! - [`nn`]: dense network engine with hand-written gradients and Adam
//! - [`replay`]: sum-tree prioritized experience replay
//! - [`agent`]: the learner (targets, projection, loss, exploration)
//! - [`baselines`]: fixed-time, self-organizing and random controllers
//! - [`harness`]: configuration, training/evaluation/ablation runs, metrics

pub mod agent;
pub mod baselines;
pub mod harness;
pub mod nn;
pub mod replay;
pub mod reward;
pub mod sim;
