//! Non-learning controllers: fixed-time plans, self-organizing traffic
//! lights and a uniform random policy.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::SignalTimings;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("invalid fixed-time plan: {0}")]
    Plan(String),
    #[error("invalid SOTL parameters: {0}")]
    Sotl(String),
}

/// What a controller sees at a decision point.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision<'a> {
    pub clock: u64,
    pub phase: usize,
    /// Green frames the current phase has run since it was last switched in.
    pub green_elapsed: u64,
    /// Waiting vehicles per movement group in the latest frame.
    pub group_waiting: &'a [u32],
}

pub trait Controller {
    fn decide<R: Rng + ?Sized>(&mut self, at: &Decision<'_>, rng: &mut R) -> usize;
}

/// A cyclic plan of `(phase, green frames)` entries. Every change between
/// consecutive entries costs one yellow plus all-red clearance, which counts
/// toward the cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedTimePlan {
    pub entries: Vec<(usize, u32)>,
}

impl FixedTimePlan {
    pub fn new(entries: Vec<(usize, u32)>) -> Self {
        FixedTimePlan { entries }
    }

    pub fn validate(&self, actions: usize, green_min: u32) -> Result<(), BaselineError> {
        if self.entries.is_empty() {
            return Err(BaselineError::Plan("plan has no entries".into()));
        }
        for &(phase, green) in &self.entries {
            if phase >= actions {
                return Err(BaselineError::Plan(format!("phase {phase} out of range for {actions} phases")));
            }
            if green < green_min {
                return Err(BaselineError::Plan(format!("green {green} shorter than the minimum {green_min}")));
            }
        }
        if let Some(missing) = (0..actions).find(|p| !self.entries.iter().any(|e| e.0 == *p)) {
            return Err(BaselineError::Plan(format!("phase {missing} never served")));
        }
        Ok(())
    }

    /// Splits `total_green` across phases in proportion to `loads`, rounded
    /// to whole multiples of `green_min` (at least one each).
    pub fn proportional(loads: &[f64], green_min: u32, total_green: u32) -> Self {
        let sum: f64 = loads.iter().sum();
        let n = loads.len().max(1) as f64;
        let entries = loads
            .iter()
            .enumerate()
            .map(|(p, &l)| {
                let share = if sum > 0.0 { l / sum } else { 1.0 / n };
                let units = (share * total_green as f64 / green_min as f64).round().max(1.0) as u32;
                (p, units * green_min)
            })
            .collect();
        FixedTimePlan { entries }
    }

    fn clearance(&self, i: usize, timings: &SignalTimings) -> u64 {
        let next = self.entries[(i + 1) % self.entries.len()].0;
        if next == self.entries[i].0 {
            0
        } else {
            timings.transition() as u64
        }
    }

    pub fn cycle_length(&self, timings: &SignalTimings) -> u64 {
        (0..self.entries.len()).map(|i| self.entries[i].1 as u64 + self.clearance(i, timings)).sum()
    }
}

/// Phase owning `clock` in the plan's cycle. Each entry owns its green
/// window plus the clearance that precedes it, so the clock at which a
/// switch has to begin already maps to the next phase.
pub fn ft_next_action(plan: &FixedTimePlan, timings: &SignalTimings, clock: u64) -> usize {
    let cycle = plan.cycle_length(timings);
    let n = plan.entries.len();
    if cycle == 0 {
        return plan.entries[0].0;
    }
    // The clearance into entry 0 sits at the end of the cycle.
    let lead = plan.clearance(n - 1, timings);
    let t = (clock + lead) % cycle;
    let mut start = 0u64;
    for i in 0..n {
        let before = if i == 0 { lead } else { plan.clearance(i - 1, timings) };
        let end = start + before + plan.entries[i].1 as u64;
        if t < end {
            return plan.entries[i].0;
        }
        start = end;
    }
    plan.entries[n - 1].0
}

pub struct FixedTime {
    pub plan: FixedTimePlan,
    pub timings: SignalTimings,
}

impl Controller for FixedTime {
    fn decide<R: Rng + ?Sized>(&mut self, at: &Decision<'_>, _rng: &mut R) -> usize {
        ft_next_action(&self.plan, &self.timings, at.clock)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SotlParams {
    /// Switch once some red group has strictly more waiting vehicles than this.
    pub threshold: u32,
    /// Minimum green frames before a switch is considered.
    pub min_hold: u32,
}

impl Default for SotlParams {
    fn default() -> Self {
        SotlParams { threshold: 5, min_hold: 10 }
    }
}

impl SotlParams {
    pub fn validate(&self, green_min: u32) -> Result<(), BaselineError> {
        if self.threshold < 1 {
            return Err(BaselineError::Sotl("threshold must be at least 1".into()));
        }
        if self.min_hold < green_min {
            return Err(BaselineError::Sotl(format!("min_hold {} below minimum green {green_min}", self.min_hold)));
        }
        Ok(())
    }
}

/// The red group with the longest queue above the threshold, else `phase`.
/// Assumes the hold has elapsed.
pub fn sotl_next_action(group_waiting: &[u32], phase: usize, params: &SotlParams) -> usize {
    let mut best: Option<(usize, u32)> = None;
    for (g, &q) in group_waiting.iter().enumerate() {
        if g == phase || q <= params.threshold {
            continue;
        }
        if best.is_none_or(|(_, b)| q > b) {
            best = Some((g, q));
        }
    }
    best.map_or(phase, |(g, _)| g)
}

pub struct Sotl {
    pub params: SotlParams,
}

impl Controller for Sotl {
    fn decide<R: Rng + ?Sized>(&mut self, at: &Decision<'_>, _rng: &mut R) -> usize {
        if at.green_elapsed < self.params.min_hold as u64 {
            return at.phase;
        }
        sotl_next_action(at.group_waiting, at.phase, &self.params)
    }
}

pub struct RandomPolicy {
    pub actions: usize,
}

impl Controller for RandomPolicy {
    fn decide<R: Rng + ?Sized>(&mut self, _at: &Decision<'_>, rng: &mut R) -> usize {
        rng.gen_range(0..self.actions)
    }
}
