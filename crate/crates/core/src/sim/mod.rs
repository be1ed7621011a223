//! Discrete-time single-intersection microsimulator.

mod env;
mod flow;
mod intersection;
mod log;
mod state;

use thiserror::Error;

pub use env::{observe, ActionOutcome, Observation, TrafficEnv};
pub use flow::{FlowModel, LaneFlow, TrafficPreset};
pub use intersection::{Approach, IntersectionSpec, Movement, Turn, DEFAULT_SENSOR_RANGE, DEFAULT_SPEED_LIMIT};
pub use log::FrameLog;
pub use state::{FrameReport, SignalTimings, SimState, SpawnStats, Stage, Vehicle};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid intersection: {0}")]
    InvalidIntersection(String),
    #[error("invalid signal timings: {0}")]
    InvalidTimings(String),
    #[error("lane {lane}: invalid flow bounds [{low}, {high}]")]
    InvalidFlow { lane: usize, low: f64, high: f64 },
    #[error("expected {expected} lanes, got {got}")]
    LaneCountMismatch { expected: usize, got: usize },
    #[error("action {action} out of range for {actions} actions")]
    ActionOutOfRange { action: usize, actions: usize },
    #[error("observation needs {expected} frames, got {got}")]
    FrameCount { expected: usize, got: usize },
    #[error("unknown lane {0}")]
    UnknownLane(usize),
    #[error("lane {lane} does not serve {turn:?}")]
    TurnNotServed { lane: usize, turn: Turn },
    #[error("lane {lane}: position {position} overlaps the vehicle behind the queue tail")]
    SlotOccupied { lane: usize, position: f64 },
    #[error("frame log: {0}")]
    Io(#[from] std::io::Error),
}
