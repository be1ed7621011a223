//! Run configuration, read from TOML. Every field has a default, so an
//! empty file is a valid (desk-scale, four-phase) configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agent::{AgentConfig, EpsilonSchedule, NetworkConfig, SupportConfig, Toggles};
use crate::baselines::{FixedTimePlan, SotlParams};
use crate::replay::PerConfig;
use crate::reward::RewardParams;
use crate::sim::{FlowModel, IntersectionSpec, LaneFlow, SignalTimings, TrafficPreset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Archetype {
    Case1,
    Case2,
    Case3,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub archetype: Archetype,
    /// Required when `archetype = "custom"`.
    pub custom: Option<IntersectionSpec>,
    pub preset: TrafficPreset,
    /// Explicit per-lane bounds; overrides `preset` when present.
    pub lanes: Option<Vec<LaneFlow>>,
    /// Episode length `T` in frames.
    pub episode_length: u64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig {
            archetype: Archetype::Case3,
            custom: None,
            preset: TrafficPreset::Normal,
            lanes: None,
            episode_length: 120,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSection {
    pub gamma: f64,
    pub batch_size: usize,
    pub target_sync: u64,
    pub learning_rate: f64,
    pub adam_epsilon: f64,
    pub learn_start: usize,
    pub exploration: EpsilonSchedule,
    pub toggles: Toggles,
}

impl Default for AgentSection {
    fn default() -> Self {
        let a = AgentConfig::default();
        AgentSection {
            gamma: a.gamma,
            batch_size: a.batch_size,
            target_sync: 2_000,
            learning_rate: a.learning_rate,
            adam_epsilon: a.adam_epsilon,
            learn_start: a.learn_start,
            exploration: a.exploration,
            toggles: a.toggles,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Fixed-time plan as `[[phase, green], ...]`; when absent the green
    /// time is split in proportion to each phase's expected arrivals.
    pub plan: Option<Vec<(usize, u32)>>,
    /// Green frames per cycle for the proportional default plan.
    pub cycle_green: u32,
    pub sotl: SotlParams,
    /// Green durations tried by the fixed-time sweep, in multiples of the
    /// minimum green.
    pub sweep_units: Vec<u32>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { plan: None, cycle_green: 40, sotl: SotlParams::default(), sweep_units: vec![1, 2, 3, 4, 6] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub episodes: usize,
    pub out_dir: PathBuf,
    /// Episodes between checkpoints; 0 keeps only the final one.
    pub checkpoint_interval: usize,
    /// Seeds averaged by evaluation and used by ablations.
    pub eval_seeds: usize,
    pub eval_episodes: usize,
    /// Fill the `wallclock_ms` column; off keeps metrics byte-reproducible.
    pub record_wallclock: bool,
    /// Write every simulated frame to `frames.csv`.
    pub frame_log: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            episodes: 2_000,
            out_dir: PathBuf::from("runs/default"),
            checkpoint_interval: 500,
            eval_seeds: 3,
            eval_episodes: 20,
            record_wallclock: false,
            frame_log: false,
        }
    }
}

#[derive(Default, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub environment: EnvironmentConfig,
    pub timings: SignalTimings,
    pub reward: RewardParams,
    pub agent: AgentSection,
    pub network: NetworkConfig,
    pub support: SupportConfig,
    pub replay: PerConfig,
    pub baselines: BaselineConfig,
    pub run: RunSection,
}

fn field(section: &str, err: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("[{section}] {err}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn intersection(&self) -> Result<IntersectionSpec, HarnessError> {
        let spec = match self.environment.archetype {
            Archetype::Case1 => IntersectionSpec::case1(),
            Archetype::Case2 => IntersectionSpec::case2(),
            Archetype::Case3 => IntersectionSpec::case3(),
            Archetype::Custom => self
                .environment
                .custom
                .clone()
                .ok_or_else(|| field("environment", "archetype = \"custom\" needs an [environment.custom] table"))?,
        };
        spec.validate().map_err(|e| field("environment", e))?;
        Ok(spec)
    }

    pub fn flow(&self, spec: &IntersectionSpec) -> Result<FlowModel, HarnessError> {
        let lanes = match &self.environment.lanes {
            Some(l) => l.clone(),
            None => vec![self.environment.preset.bounds(); spec.lane_count()],
        };
        FlowModel::new(lanes, self.environment.episode_length).map_err(|e| field("environment", e))
    }

    pub fn agent_config(&self) -> AgentConfig {
        let a = &self.agent;
        AgentConfig {
            gamma: a.gamma,
            batch_size: a.batch_size,
            target_sync: a.target_sync,
            learning_rate: a.learning_rate,
            adam_epsilon: a.adam_epsilon,
            exploration: a.exploration,
            learn_start: a.learn_start,
            toggles: a.toggles,
            network: self.network,
            support: self.support,
            replay: self.replay,
        }
    }

    /// The configured fixed-time plan, or the proportional default.
    pub fn ft_plan(&self, spec: &IntersectionSpec) -> Result<FixedTimePlan, HarnessError> {
        let plan = match &self.baselines.plan {
            Some(entries) => FixedTimePlan::new(entries.clone()),
            None => {
                let flow = self.flow(spec)?;
                let loads = group_loads(spec, &flow);
                FixedTimePlan::proportional(&loads, self.timings.green_min, self.baselines.cycle_green)
            }
        };
        plan.validate(spec.action_count(), self.timings.green_min).map_err(|e| field("baselines", e))?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let spec = self.intersection()?;
        if self.environment.episode_length == 0 {
            return Err(field("environment", "episode_length must be at least 1"));
        }
        if let Some(lanes) = &self.environment.lanes {
            if lanes.len() != spec.lane_count() {
                return Err(field(
                    "environment",
                    format!("lanes has {} entries but the intersection has {} lanes", lanes.len(), spec.lane_count()),
                ));
            }
        }
        self.flow(&spec)?;
        self.timings.validate().map_err(|e| field("timings", e))?;
        self.reward.validate().map_err(|e| field("reward", e))?;
        let agent = self.agent_config();
        agent.validate().map_err(|e| field("agent", e))?;
        agent
            .network_shape(crate::sim::Observation::flat_len(spec.action_count(), self.timings.green_min), spec.action_count())
            .validate()
            .map_err(|e| field("network", e))?;
        self.baselines.sotl.validate(self.timings.green_min).map_err(|e| field("baselines.sotl", e))?;
        if self.baselines.sweep_units.contains(&0) {
            return Err(field("baselines", "sweep_units entries must be at least 1"));
        }
        self.ft_plan(&spec)?;
        if self.run.episodes == 0 {
            return Err(field("run", "episodes must be at least 1"));
        }
        if self.run.eval_seeds == 0 || self.run.eval_episodes == 0 {
            return Err(field("run", "eval_seeds and eval_episodes must be at least 1"));
        }
        Ok(())
    }
}

/// Expected arrivals per frame released by each phase, from the midpoint of
/// every lane's generation bounds split evenly across the lane's turns.
pub fn group_loads(spec: &IntersectionSpec, flow: &FlowModel) -> Vec<f64> {
    let mut loads = vec![0.0; spec.action_count()];
    for (lane, bounds) in flow.lanes.iter().enumerate() {
        let approach = spec.lane_approach(lane);
        let turns = spec.turns_of_lane(lane);
        let mean = 0.5 * (bounds.low + bounds.high) / turns.len().max(1) as f64;
        for &turn in turns {
            let mask = spec.group_mask(approach, turn);
            for (g, load) in loads.iter_mut().enumerate() {
                if mask & (1 << g) != 0 {
                    *load += mean;
                }
            }
        }
    }
    loads
}
