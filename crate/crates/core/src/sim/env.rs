//! Action-level environment: one action holds or switches the signal and
//! then runs exactly `Tg` green frames, which form the next observation.

use std::io::Write;

use rand::Rng;

use super::flow::FlowModel;
use super::intersection::IntersectionSpec;
use super::log::FrameLog;
use super::state::{FrameReport, SignalTimings, SimState, SpawnStats};
use super::SimError;

/// Per-frame movement-group counts over one green window plus the current phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub frames: Vec<Vec<u32>>,
    pub phase_key: usize,
}

impl Observation {
    pub fn zeros(action_count: usize, green_min: u32, phase_key: usize) -> Self {
        Observation { frames: vec![vec![0; action_count]; green_min as usize], phase_key }
    }

    /// Length of the flattened vector: `|A| * Tg + 1`.
    pub fn flat_len(action_count: usize, green_min: u32) -> usize {
        action_count * green_min as usize + 1
    }

    pub fn flatten(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.frames.iter().flatten().copied().collect();
        out.push(self.phase_key as u32);
        out
    }

    /// Counts scaled by `count_scale`, phase key scaled by the action count.
    pub fn normalized(&self, count_scale: f64) -> Vec<f64> {
        let actions = self.frames.first().map_or(1, Vec::len).max(1);
        let mut out: Vec<f64> = self.frames.iter().flatten().map(|&c| c as f64 / count_scale).collect();
        out.push(self.phase_key as f64 / actions as f64);
        out
    }
}

/// Builds the observation from the green frames of the last action.
pub fn observe(frames: &[FrameReport], green_min: u32, phase_key: usize) -> Result<Observation, SimError> {
    if frames.len() != green_min as usize {
        return Err(SimError::FrameCount { expected: green_min as usize, got: frames.len() });
    }
    Ok(Observation { frames: frames.iter().map(|f| f.group_counts.clone()).collect(), phase_key })
}

#[derive(Clone, Debug)]
pub struct ActionOutcome {
    /// Exactly `Tg` green frames of the new (or held) phase.
    pub green_frames: Vec<FrameReport>,
    /// Waiting vehicles at the instant the green window opens.
    pub waiting_at_start: u32,
    pub phase_changed: bool,
    /// All frames simulated, clearance included.
    pub frames_elapsed: u32,
    pub departures: u32,
}

#[derive(Debug)]
pub struct TrafficEnv {
    spec: IntersectionSpec,
    timings: SignalTimings,
    flow: FlowModel,
    state: SimState,
    pe: Vec<f64>,
    log: Option<FrameLog<Box<dyn Write + Send>>>,
}

impl TrafficEnv {
    pub fn new(spec: IntersectionSpec, timings: SignalTimings, flow: FlowModel) -> Result<Self, SimError> {
        spec.validate()?;
        timings.validate()?;
        flow.validate()?;
        if flow.lanes.len() != spec.lane_count() {
            return Err(SimError::LaneCountMismatch { expected: spec.lane_count(), got: flow.lanes.len() });
        }
        let state = SimState::new(&spec, &timings)?;
        let pe = vec![0.0; spec.lane_count()];
        Ok(TrafficEnv { spec, timings, flow, state, pe, log: None })
    }

    pub fn spec(&self) -> &IntersectionSpec {
        &self.spec
    }

    pub fn timings(&self) -> &SignalTimings {
        &self.timings
    }

    pub fn flow(&self) -> &FlowModel {
        &self.flow
    }

    pub fn set_flow(&mut self, flow: FlowModel) -> Result<(), SimError> {
        flow.validate()?;
        if flow.lanes.len() != self.spec.lane_count() {
            return Err(SimError::LaneCountMismatch { expected: self.spec.lane_count(), got: flow.lanes.len() });
        }
        self.flow = flow;
        Ok(())
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut SimState {
        &mut self.state
    }

    pub fn episode_probabilities(&self) -> &[f64] {
        &self.pe
    }

    pub fn action_count(&self) -> usize {
        self.spec.action_count()
    }

    pub fn observation_len(&self) -> usize {
        Observation::flat_len(self.action_count(), self.timings.green_min)
    }

    pub fn set_frame_log(&mut self, writer: Box<dyn Write + Send>) -> Result<(), SimError> {
        self.log = Some(FrameLog::new(writer, self.action_count())?);
        Ok(())
    }

    /// Starts a fresh episode: empty intersection, phase 0 green, new `Pe` draws.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Observation, SimError> {
        self.pe = self.flow.sample_episode(rng)?;
        self.state = SimState::new(&self.spec, &self.timings)?;
        Ok(Observation::zeros(self.action_count(), self.timings.green_min, 0))
    }

    /// Starts an episode with explicit per-lane probabilities.
    pub fn reset_with(&mut self, pe: Vec<f64>) -> Result<Observation, SimError> {
        if pe.len() != self.spec.lane_count() {
            return Err(SimError::LaneCountMismatch { expected: self.spec.lane_count(), got: pe.len() });
        }
        self.pe = pe;
        self.state = SimState::new(&self.spec, &self.timings)?;
        Ok(Observation::zeros(self.action_count(), self.timings.green_min, 0))
    }

    pub fn is_done(&self) -> bool {
        self.state.clock >= self.flow.episode_length
    }

    /// Total episode wait `Omega` in vehicle-frames.
    pub fn episode_wait(&self) -> u64 {
        self.state.omega()
    }

    pub fn spawn_stats(&self) -> SpawnStats {
        self.state.stats()
    }

    fn frame<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<FrameReport, SimError> {
        if self.state.clock < self.flow.episode_length {
            self.state.spawn_step(&self.pe, rng);
        }
        let report = self.state.advance_frame(&self.timings);
        if let Some(log) = self.log.as_mut() {
            log.write(&report)?;
        }
        Ok(report)
    }

    /// Holds the current phase for `Tg` frames, or clears it through yellow
    /// and all-red and then runs `Tg` frames of the new phase.
    pub fn apply_action<R: Rng + ?Sized>(&mut self, action: usize, rng: &mut R) -> Result<ActionOutcome, SimError> {
        let actions = self.action_count();
        if action >= actions {
            return Err(SimError::ActionOutOfRange { action, actions });
        }
        let phase_changed = action != self.state.phase;
        let mut frames_elapsed = 0u32;
        let mut departures = 0u32;
        if phase_changed {
            self.state.begin_switch(action, &self.timings);
            while self.state.stage != super::state::Stage::Green {
                let r = self.frame(rng)?;
                departures += r.departures;
                frames_elapsed += 1;
            }
        } else {
            self.state.hold(&self.timings);
        }
        debug_assert_eq!(self.state.phase, action);
        let waiting_at_start = self.state.waiting_now();
        let mut green_frames = Vec::with_capacity(self.timings.green_min as usize);
        for _ in 0..self.timings.green_min {
            let r = self.frame(rng)?;
            departures += r.departures;
            green_frames.push(r);
        }
        frames_elapsed += self.timings.green_min;
        Ok(ActionOutcome { green_frames, waiting_at_start, phase_changed, frames_elapsed, departures })
    }

    pub fn observe(&self, outcome: &ActionOutcome) -> Result<Observation, SimError> {
        observe(&outcome.green_frames, self.timings.green_min, self.state.phase)
    }
}
