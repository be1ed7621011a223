//! Stochastic vehicle generation.
//!
//! Each lane draws a per-episode generation probability `Pe ~ U(l, h)`;
//! every frame of the episode is then an independent Bernoulli(Pe) trial,
//! so the episode total on a lane is Binomial(T, Pe).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;

/// Per-lane `(low, high)` bounds on the generation probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneFlow {
    pub low: f64,
    pub high: f64,
}

impl LaneFlow {
    pub const fn new(low: f64, high: f64) -> Self {
        LaneFlow { low, high }
    }

    pub const fn fixed(p: f64) -> Self {
        LaneFlow { low: p, high: p }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficPreset {
    Low,
    Normal,
    High,
}

impl TrafficPreset {
    pub fn bounds(self) -> LaneFlow {
        match self {
            TrafficPreset::Low => LaneFlow::new(0.01, 0.03),
            TrafficPreset::Normal => LaneFlow::new(0.03, 0.07),
            TrafficPreset::High => LaneFlow::new(0.07, 0.12),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowModel {
    pub lanes: Vec<LaneFlow>,
    /// Episode length `T` in frames; vehicles are generated only for `t < T`.
    pub episode_length: u64,
}

impl FlowModel {
    pub fn new(lanes: Vec<LaneFlow>, episode_length: u64) -> Result<Self, SimError> {
        let model = FlowModel { lanes, episode_length };
        model.validate()?;
        Ok(model)
    }

    pub fn uniform(lane_count: usize, flow: LaneFlow, episode_length: u64) -> Result<Self, SimError> {
        Self::new(vec![flow; lane_count], episode_length)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (lane, f) in self.lanes.iter().enumerate() {
            let in_unit = |p: f64| (0.0..=1.0).contains(&p);
            if !in_unit(f.low) || !in_unit(f.high) || f.low > f.high {
                return Err(SimError::InvalidFlow { lane, low: f.low, high: f.high });
            }
        }
        Ok(())
    }

    /// Draws one `Pe` per lane, independently and uniformly on `[low, high]`.
    pub fn sample_episode<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>, SimError> {
        self.validate()?;
        Ok(self
            .lanes
            .iter()
            .map(|f| if f.low == f.high { f.low } else { rng.gen_range(f.low..=f.high) })
            .collect())
    }
}
