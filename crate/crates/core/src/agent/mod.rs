//! The learner: action selection, double-Q distributional targets,
//! categorical projection, prioritized loss and target synchronization.

mod learner;
mod projection;
mod schedule;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{AdamConfig, NetError, NetworkShape, Support};
use crate::replay::{PerConfig, ReplayError};

pub use learner::{argmax, Learner, TargetNoise, Targets, TrainReport};
pub use projection::categorical_project;
pub use schedule::{epsilon_at, EpsilonSchedule};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    Config(String),
    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("learner checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The five component switches. All off is plain DQN.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Toggles {
    pub double: bool,
    pub dueling: bool,
    pub per: bool,
    pub noisy: bool,
    pub distributional: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles::all(true)
    }
}

impl Toggles {
    pub const NAMES: [&'static str; 5] = ["double", "dueling", "per", "noisy", "distributional"];

    pub fn all(on: bool) -> Self {
        Toggles { double: on, dueling: on, per: on, noisy: on, distributional: on }
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        Some(match name {
            "double" => self.double,
            "dueling" => self.dueling,
            "per" => self.per,
            "noisy" => self.noisy,
            "distributional" => self.distributional,
            _ => return None,
        })
    }

    /// Returns false for an unknown name.
    pub fn set(&mut self, name: &str, on: bool) -> bool {
        let slot = match name {
            "double" => &mut self.double,
            "dueling" => &mut self.dueling,
            "per" => &mut self.per,
            "noisy" => &mut self.noisy,
            "distributional" => &mut self.distributional,
            _ => return false,
        };
        *slot = on;
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub fc_units: usize,
    pub fc_layers: usize,
    pub stream_units: usize,
    pub stream_layers: usize,
    pub sigma0: f64,
    /// Vehicle count that maps to an input of 1.0.
    pub count_scale: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { fc_units: 512, fc_layers: 2, stream_units: 64, stream_layers: 2, sigma0: 0.4, count_scale: 20.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupportConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub atoms: usize,
}

impl Default for SupportConfig {
    fn default() -> Self {
        SupportConfig { v_min: -4.0, v_max: 4.0, atoms: 41 }
    }
}

impl SupportConfig {
    pub fn build(&self) -> Result<Support, NetError> {
        Support::new(self.v_min, self.v_max, self.atoms)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub gamma: f64,
    pub batch_size: usize,
    /// Target network sync period, in simulation frames.
    pub target_sync: u64,
    pub learning_rate: f64,
    pub adam_epsilon: f64,
    pub exploration: EpsilonSchedule,
    /// Transitions stored before the first optimization step.
    pub learn_start: usize,
    pub toggles: Toggles,
    pub network: NetworkConfig,
    pub support: SupportConfig,
    pub replay: PerConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        AgentConfig {
            gamma: 0.99,
            batch_size: 32,
            target_sync: 10_000,
            learning_rate: adam.learning_rate,
            adam_epsilon: adam.epsilon,
            exploration: EpsilonSchedule::default(),
            learn_start: 1_000,
            toggles: Toggles::default(),
            network: NetworkConfig::default(),
            support: SupportConfig::default(),
            replay: PerConfig::default(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::Config(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1");
        }
        if self.target_sync < 1 {
            return bad("target_sync must be at least 1");
        }
        if !(self.learning_rate > 0.0) || !(self.adam_epsilon > 0.0) {
            return bad("learning_rate and adam_epsilon must be positive");
        }
        let e = &self.exploration;
        if !(0.0..=1.0).contains(&e.initial) || !(0.0..=1.0).contains(&e.final_value) || !(e.decay > 0.0) {
            return bad("exploration needs initial, final in [0, 1] and decay > 0");
        }
        if !(self.network.count_scale > 0.0) || !(self.network.sigma0 >= 0.0) {
            return bad("count_scale must be positive and sigma0 non-negative");
        }
        self.support.build()?;
        self.replay.validate()?;
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.learning_rate, epsilon: self.adam_epsilon, ..AdamConfig::default() }
    }

    pub fn network_shape(&self, input: usize, actions: usize) -> NetworkShape {
        let t = &self.toggles;
        NetworkShape {
            input,
            actions,
            atoms: if t.distributional { self.support.atoms } else { 1 },
            distributional: t.distributional,
            fc_units: self.network.fc_units,
            fc_layers: self.network.fc_layers,
            stream_units: self.network.stream_units,
            stream_layers: self.network.stream_layers,
            dueling: t.dueling,
            noisy: t.noisy,
            sigma0: self.network.sigma0,
        }
    }
}
