use serde::{Deserialize, Serialize};

/// `eps_t = final + (initial - final) * exp(-t / decay)`, with `t` in frames.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_value: f64,
    pub decay: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule { initial: 1.0, final_value: 0.05, decay: 15_000.0 }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, frame: u64) -> f64 {
        if frame == u64::MAX {
            return self.final_value;
        }
        self.final_value + (self.initial - self.final_value) * (-(frame as f64) / self.decay).exp()
    }
}

/// Exploration rate at `frame`; zero whenever noisy layers drive exploration.
pub fn epsilon_at(frame: u64, schedule: &EpsilonSchedule, noisy: bool) -> f64 {
    if noisy {
        0.0
    } else {
        schedule.at(frame)
    }
}
