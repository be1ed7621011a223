//! Vehicle kinematics, signal stages and wait-time accounting.
//!
//! Vehicles follow a point-queue rule with a fixed headway: each frame a
//! vehicle advances `min(v, gap_to_leader - min_gap, distance_to_stop_line)`,
//! where the last term only applies while its movement is not released.
//! Leader positions are read from the start of the frame, so a standing
//! queue discharges as a wave, one vehicle per frame.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::intersection::{Approach, IntersectionSpec, Turn};
use super::SimError;

/// Moves shorter than this are treated as standing still.
const STANDSTILL_EPS: f64 = 1e-9;

/// Minimum green, yellow and all-red durations, in frames (1 frame = 1 s).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalTimings {
    pub green_min: u32,
    pub yellow: u32,
    pub all_red: u32,
}

impl Default for SignalTimings {
    fn default() -> Self {
        SignalTimings { green_min: 10, yellow: 3, all_red: 2 }
    }
}

impl SignalTimings {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.green_min == 0 {
            return Err(SimError::InvalidTimings("green_min must be at least 1".into()));
        }
        Ok(())
    }

    pub fn transition(&self) -> u32 {
        self.yellow + self.all_red
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Green,
    Yellow,
    AllRed,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Green => "green",
            Stage::Yellow => "yellow",
            Stage::AllRed => "all_red",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vehicle {
    pub id: u64,
    pub lane: usize,
    pub turn: Turn,
    /// Meters upstream of the stop line; negative once past it.
    pub position: f64,
    pub speed: f64,
    pub wait_frames: u32,
    pub spawn_frame: u64,
}

#[derive(Clone, Debug)]
struct LaneMeta {
    approach: Approach,
    turns: Vec<Turn>,
    /// Movement-group bitmask per entry of `turns`.
    masks: Vec<u64>,
    /// Bit `g` set when the turn must yield to opposing traffic under group `g`.
    permissive: Vec<u64>,
}

impl LaneMeta {
    fn turn_index(&self, turn: Turn) -> usize {
        self.turns.iter().position(|&t| t == turn).expect("vehicle turn served by its lane")
    }
}

/// Counters backing the conservation identity
/// `attempts = departed + in_system + suppressed`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpawnStats {
    pub attempts: u64,
    pub spawned: u64,
    pub suppressed: u64,
    pub departed: u64,
}

/// What happened during one simulated frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport {
    pub frame: u64,
    pub phase: usize,
    pub stage: Stage,
    /// Vehicles within sensor range per movement group.
    pub group_counts: Vec<u32>,
    /// Stationary vehicles within sensor range per movement group.
    pub group_waiting: Vec<u32>,
    /// Stationary vehicles within sensor range, each counted once.
    pub waiting: u32,
    pub departures: u32,
    /// Episode wait accumulator after this frame.
    pub omega: u64,
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub clock: u64,
    pub phase: usize,
    pub stage: Stage,
    pub stage_timer: u32,
    pending_phase: usize,
    lanes: Vec<VecDeque<Vehicle>>,
    meta: Vec<LaneMeta>,
    approaches: Vec<Approach>,
    action_count: usize,
    sensor_range: f64,
    speed_limit: f64,
    lane_length: f64,
    box_length: f64,
    min_gap: f64,
    yield_distance: f64,
    next_id: u64,
    omega: u64,
    stats: SpawnStats,
    /// Wait frames of vehicles that already left, so `omega` can be recounted.
    departed_wait: u64,
}

impl SimState {
    /// Empty intersection at frame 0, phase 0 green with the minimum timer.
    pub fn new(spec: &IntersectionSpec, timings: &SignalTimings) -> Result<Self, SimError> {
        spec.validate()?;
        timings.validate()?;
        let meta = (0..spec.lane_count())
            .map(|lane| {
                let approach = spec.lane_approach(lane);
                let turns = spec.turns_of_lane(lane).to_vec();
                let masks = turns.iter().map(|&t| spec.group_mask(approach, t)).collect();
                let permissive = turns
                    .iter()
                    .map(|&t| {
                        spec.movement_groups.iter().enumerate().fold(0u64, |acc, (g, group)| {
                            let yields =
                                group.iter().any(|m| m.approach == approach && m.turn == t && m.permissive);
                            if yields { acc | (1 << g) } else { acc }
                        })
                    })
                    .collect();
                LaneMeta { approach, turns, masks, permissive }
            })
            .collect();
        Ok(SimState {
            clock: 0,
            phase: 0,
            stage: Stage::Green,
            stage_timer: timings.green_min,
            pending_phase: 0,
            lanes: vec![VecDeque::new(); spec.lane_count()],
            meta,
            approaches: spec.approaches.clone(),
            action_count: spec.action_count(),
            sensor_range: spec.sensor_range,
            speed_limit: spec.speed_limit,
            lane_length: spec.lane_length,
            box_length: spec.box_length,
            min_gap: spec.min_gap,
            yield_distance: spec.yield_distance,
            next_id: 0,
            omega: 0,
            stats: SpawnStats::default(),
            departed_wait: 0,
        })
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    pub fn omega(&self) -> u64 {
        self.omega
    }

    pub fn stats(&self) -> SpawnStats {
        self.stats
    }

    pub fn in_system(&self) -> usize {
        self.lanes.iter().map(VecDeque::len).sum()
    }

    pub fn vehicles(&self) -> impl Iterator<Item = &Vehicle> {
        self.lanes.iter().flatten()
    }

    /// Sum of `wait_frames` over every vehicle spawned this episode,
    /// including those that already departed.
    pub fn recount_wait(&self) -> u64 {
        self.departed_wait + self.vehicles().map(|v| v.wait_frames as u64).sum::<u64>()
    }

    fn in_range(&self, position: f64) -> bool {
        (0.0..=self.sensor_range).contains(&position)
    }

    /// Stationary vehicles currently within sensor range.
    pub fn waiting_now(&self) -> u32 {
        self.vehicles().filter(|v| self.in_range(v.position) && v.speed == 0.0).count() as u32
    }

    /// Places a vehicle directly; used for scripted scenarios.
    pub fn insert_vehicle(&mut self, lane: usize, turn: Turn, position: f64) -> Result<u64, SimError> {
        let meta = self.meta.get(lane).ok_or(SimError::UnknownLane(lane))?;
        if !meta.turns.contains(&turn) {
            return Err(SimError::TurnNotServed { lane, turn });
        }
        let queue = &self.lanes[lane];
        if queue.back().is_some_and(|b| b.position > position - self.min_gap) {
            return Err(SimError::SlotOccupied { lane, position });
        }
        let id = self.next_id;
        self.next_id += 1;
        self.stats.attempts += 1;
        self.stats.spawned += 1;
        self.lanes[lane].push_back(Vehicle {
            id,
            lane,
            turn,
            position,
            speed: self.speed_limit,
            wait_frames: 0,
            spawn_frame: self.clock,
        });
        Ok(id)
    }

    /// One Bernoulli(Pe) trial per lane; a success appends a vehicle at the
    /// upstream boundary unless the entry slot is still occupied.
    pub fn spawn_step<R: Rng + ?Sized>(&mut self, pe: &[f64], rng: &mut R) -> Vec<u64> {
        debug_assert_eq!(pe.len(), self.lanes.len());
        let mut created = Vec::new();
        for lane in 0..self.lanes.len() {
            if rng.gen::<f64>() >= pe[lane] {
                continue;
            }
            let meta = &self.meta[lane];
            let turn = if meta.turns.len() == 1 {
                meta.turns[0]
            } else {
                meta.turns[rng.gen_range(0..meta.turns.len())]
            };
            self.stats.attempts += 1;
            let blocked = self.lanes[lane]
                .back()
                .is_some_and(|b| b.position > self.lane_length - self.min_gap);
            if blocked {
                self.stats.suppressed += 1;
                continue;
            }
            let id = self.next_id;
            self.next_id += 1;
            self.stats.spawned += 1;
            self.lanes[lane].push_back(Vehicle {
                id,
                lane,
                turn,
                position: self.lane_length,
                speed: self.speed_limit,
                wait_frames: 0,
                spawn_frame: self.clock,
            });
            created.push(id);
        }
        created
    }

    /// Starts the yellow / all-red sequence towards `phase`, or goes straight
    /// to green when both clearance intervals are zero.
    pub fn begin_switch(&mut self, phase: usize, timings: &SignalTimings) {
        self.pending_phase = phase;
        if timings.yellow > 0 {
            self.stage = Stage::Yellow;
            self.stage_timer = timings.yellow;
        } else if timings.all_red > 0 {
            self.stage = Stage::AllRed;
            self.stage_timer = timings.all_red;
        } else {
            self.start_green(timings);
        }
    }

    /// Re-arms the minimum green timer for a hold of the current phase.
    pub fn hold(&mut self, timings: &SignalTimings) {
        debug_assert_eq!(self.stage, Stage::Green);
        self.stage_timer = timings.green_min;
    }

    fn start_green(&mut self, timings: &SignalTimings) {
        self.phase = self.pending_phase;
        self.stage = Stage::Green;
        self.stage_timer = timings.green_min;
    }

    /// Opposing through/right traffic that a permissive left must yield to,
    /// evaluated per approach from start-of-frame positions.
    fn opposing_conflicts(&self, green_bit: u64) -> Vec<bool> {
        self.approaches
            .iter()
            .map(|&approach| {
                let opposite = approach.opposite();
                self.lanes.iter().zip(&self.meta).filter(|(_, m)| m.approach == opposite).any(|(queue, meta)| {
                    queue.iter().any(|v| {
                        if v.turn == Turn::Left {
                            return false;
                        }
                        let p = v.position;
                        let released = meta.masks[meta.turn_index(v.turn)] & green_bit != 0;
                        p >= -self.box_length && p <= self.yield_distance && (p < 0.0 || released)
                    })
                })
            })
            .collect()
    }

    /// Advances the world by one frame.
    pub fn advance_frame(&mut self, timings: &SignalTimings) -> FrameReport {
        let green_bit = if self.stage == Stage::Green { 1u64 << self.phase } else { 0 };
        let conflicts = if green_bit != 0 && self.meta.iter().any(|m| m.permissive.iter().any(|p| p & green_bit != 0)) {
            self.opposing_conflicts(green_bit)
        } else {
            vec![false; self.approaches.len()]
        };

        let v_max = self.speed_limit;
        let gap = self.min_gap;
        for (queue, meta) in self.lanes.iter_mut().zip(&self.meta) {
            let approach_idx = self.approaches.iter().position(|&a| a == meta.approach).unwrap_or(0);
            let mut leader_old: Option<f64> = None;
            for veh in queue.iter_mut() {
                let old = veh.position;
                let mut step = v_max;
                if let Some(lead) = leader_old {
                    step = step.min((old - lead - gap).max(0.0));
                }
                if old >= 0.0 {
                    let t = meta.turn_index(veh.turn);
                    let released = meta.masks[t] & green_bit != 0
                        && !(meta.permissive[t] & green_bit != 0 && conflicts[approach_idx]);
                    if !released {
                        step = step.min(old);
                    }
                }
                if step < STANDSTILL_EPS {
                    step = 0.0;
                }
                veh.position = old - step;
                veh.speed = step;
                leader_old = Some(old);
            }
        }

        let mut departures = 0u32;
        for queue in &mut self.lanes {
            while queue.front().is_some_and(|v| v.position < -self.box_length) {
                let v = queue.pop_front().expect("front exists");
                self.departed_wait += v.wait_frames as u64;
                departures += 1;
            }
        }
        self.stats.departed += departures as u64;

        let groups = self.action_count;
        let mut group_counts = vec![0u32; groups];
        let mut group_waiting = vec![0u32; groups];
        let mut waiting = 0u32;
        let d = self.sensor_range;
        for (queue, meta) in self.lanes.iter_mut().zip(&self.meta) {
            for veh in queue.iter_mut() {
                if !(0.0..=d).contains(&veh.position) {
                    continue;
                }
                let mask = meta.masks[meta.turn_index(veh.turn)];
                let is_waiting = veh.speed == 0.0;
                if is_waiting {
                    veh.wait_frames += 1;
                    waiting += 1;
                }
                for g in 0..groups {
                    if mask & (1 << g) != 0 {
                        group_counts[g] += 1;
                        if is_waiting {
                            group_waiting[g] += 1;
                        }
                    }
                }
            }
        }
        self.omega += waiting as u64;

        let report = FrameReport {
            frame: self.clock,
            phase: self.phase,
            stage: self.stage,
            group_counts,
            group_waiting,
            waiting,
            departures,
            omega: self.omega,
        };

        match self.stage {
            Stage::Green => self.stage_timer = self.stage_timer.saturating_sub(1),
            Stage::Yellow => {
                self.stage_timer -= 1;
                if self.stage_timer == 0 {
                    if timings.all_red > 0 {
                        self.stage = Stage::AllRed;
                        self.stage_timer = timings.all_red;
                    } else {
                        self.start_green(timings);
                    }
                }
            }
            Stage::AllRed => {
                self.stage_timer -= 1;
                if self.stage_timer == 0 {
                    self.start_green(timings);
                }
            }
        }
        self.clock += 1;
        report
    }
}
