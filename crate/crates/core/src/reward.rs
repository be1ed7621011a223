//! Action-based, episodic and combined rewards.
//!
//! The action reward penalizes waiting vehicles over the `Tg + 1` frames of
//! a green window, idle frames with nobody waiting, and phase changes. The
//! episodic reward is a scaled sigmoid of the episode's total wait.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::ActionOutcome;

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("penalty weight {name} must be non-negative, got {value}")]
    NegativeWeight { name: &'static str, value: f64 },
    #[error("eta must be non-zero")]
    ZeroEta,
    #[error("action window needs {expected} records, got {got}")]
    WindowLength { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardParams {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub a: f64,
    pub b: f64,
    pub eta: f64,
    pub zeta: f64,
    /// Charge `p2` only on windows that follow a phase change.
    pub p2_gate_on_phase_change: bool,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            p1: 0.002,
            p2: 0.01,
            p3: 0.1,
            a: 3.5,
            b: -0.5,
            eta: 0.007,
            // Negative shift puts the sigmoid transition near 1000 vehicle-frames.
            zeta: -1000.0,
            p2_gate_on_phase_change: false,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<(), RewardError> {
        for (name, value) in [("p1", self.p1), ("p2", self.p2), ("p3", self.p3)] {
            if !(value >= 0.0) {
                return Err(RewardError::NegativeWeight { name, value });
            }
        }
        if self.eta == 0.0 {
            return Err(RewardError::ZeroEta);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowRecord {
    pub waiting: u32,
    pub any_waiting: bool,
}

impl WindowRecord {
    pub fn new(waiting: u32) -> Self {
        WindowRecord { waiting, any_waiting: waiting > 0 }
    }
}

/// Frames `t_a ..= t_a + Tg` of one action.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionWindow {
    pub records: Vec<WindowRecord>,
    pub phase_changed: bool,
}

impl ActionWindow {
    pub fn new(records: Vec<WindowRecord>, phase_changed: bool, green_min: u32) -> Result<Self, RewardError> {
        let expected = green_min as usize + 1;
        if records.len() != expected {
            return Err(RewardError::WindowLength { expected, got: records.len() });
        }
        Ok(ActionWindow { records, phase_changed })
    }

    pub fn from_outcome(outcome: &ActionOutcome) -> Self {
        let records = std::iter::once(outcome.waiting_at_start)
            .chain(outcome.green_frames.iter().map(|f| f.waiting))
            .map(WindowRecord::new)
            .collect();
        ActionWindow { records, phase_changed: outcome.phase_changed }
    }
}

pub fn action_reward(window: &ActionWindow, params: &RewardParams) -> f64 {
    let charge_idle = !params.p2_gate_on_phase_change || window.phase_changed;
    let frames: f64 = window
        .records
        .iter()
        .map(|r| {
            let idle = if charge_idle && !r.any_waiting { params.p2 } else { 0.0 };
            params.p1 * r.waiting as f64 + idle
        })
        .sum();
    frames + if window.phase_changed { params.p3 } else { 0.0 }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `a * sigmoid(eta * (omega + zeta)) + b`.
pub fn episodic_reward(omega: f64, params: &RewardParams) -> f64 {
    params.a * sigmoid(params.eta * (omega + params.zeta)) + params.b
}

pub fn total_reward(action: f64, episodic: f64, terminal: bool) -> f64 {
    -(action + if terminal { episodic } else { 0.0 })
}
