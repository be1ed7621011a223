//! Proportional prioritized replay.
//!
//! Leaves store `p^alpha` with `p = |delta| + epsilon`; new transitions get
//! the largest leaf value seen so far. Sampling is stratified: the total
//! mass is cut into `m` equal segments and one point is drawn per segment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sum_tree::SumTree;
use super::ReplayError;

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f32>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f32>,
    pub terminal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerConfig {
    pub capacity: usize,
    pub alpha: f64,
    pub beta0: f64,
    pub beta_increment: f64,
    pub epsilon: f64,
}

impl Default for PerConfig {
    fn default() -> Self {
        PerConfig { capacity: 1 << 15, alpha: 0.6, beta0: 0.4, beta_increment: 0.001, epsilon: 0.01 }
    }
}

impl PerConfig {
    pub fn validate(&self) -> Result<(), ReplayError> {
        if self.capacity == 0 || !self.capacity.is_power_of_two() {
            return Err(ReplayError::Config(format!("capacity must be a power of two, got {}", self.capacity)));
        }
        if !(self.alpha >= 0.0) {
            return Err(ReplayError::Config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.beta0) || !(self.beta_increment >= 0.0) {
            return Err(ReplayError::Config("beta0 must lie in [0, 1] and its increment be >= 0".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(ReplayError::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Slot plus the write stamp it had when sampled, so overwritten slots
/// can be recognized at update time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleIndex {
    pub slot: usize,
    pub stamp: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledBatch {
    pub indices: Vec<SampleIndex>,
    /// Importance-sampling weights normalized so the batch maximum is 1.
    pub weights: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Exponent used for these weights (before the post-sample increment).
    pub beta: f64,
}

/// `(size * P(i))^-beta`, divided by the largest weight in the batch.
pub fn importance_weights(probabilities: &[f64], size: usize, beta: f64) -> Vec<f64> {
    let raw: Vec<f64> = probabilities.iter().map(|p| (size as f64 * p).powf(-beta)).collect();
    let max = raw.iter().copied().fold(0.0f64, f64::max);
    raw.into_iter().map(|w| w / max).collect()
}

#[derive(Clone, Debug)]
pub struct PriorityBuffer {
    config: PerConfig,
    width: usize,
    tree: SumTree,
    data: Vec<Option<Transition>>,
    stamps: Vec<u64>,
    next: usize,
    len: usize,
    pushes: u64,
    max_leaf: f64,
    beta: f64,
    stale_skips: u64,
}

impl PriorityBuffer {
    pub fn new(config: PerConfig, observation_len: usize) -> Result<Self, ReplayError> {
        config.validate()?;
        Ok(PriorityBuffer {
            config,
            width: observation_len,
            tree: SumTree::new(config.capacity),
            data: vec![None; config.capacity],
            stamps: vec![0; config.capacity],
            next: 0,
            len: 0,
            pushes: 0,
            max_leaf: 1.0,
            beta: config.beta0,
            stale_skips: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.config.capacity
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn max_leaf(&self) -> f64 {
        self.max_leaf
    }

    /// Raw priority `p` corresponding to the current maximum leaf.
    pub fn max_priority(&self) -> f64 {
        if self.config.alpha == 0.0 {
            1.0
        } else {
            self.max_leaf.powf(1.0 / self.config.alpha)
        }
    }

    pub fn stale_skips(&self) -> u64 {
        self.stale_skips
    }

    pub fn total_priority(&self) -> f64 {
        self.tree.total()
    }

    pub fn leaf(&self, slot: usize) -> f64 {
        self.tree.leaf(slot)
    }

    pub fn transition(&self, index: SampleIndex) -> Option<&Transition> {
        if self.stamps.get(index.slot) != Some(&index.stamp) {
            return None;
        }
        self.data[index.slot].as_ref()
    }

    /// Index of the most recent write to `slot`.
    pub fn index_of(&self, slot: usize) -> Option<SampleIndex> {
        self.data.get(slot)?.as_ref().map(|_| SampleIndex { slot, stamp: self.stamps[slot] })
    }

    /// Stores a transition at maximum priority, overwriting the oldest when full.
    pub fn push(&mut self, t: Transition) -> Result<SampleIndex, ReplayError> {
        if t.state.len() != self.width || t.next_state.len() != self.width {
            return Err(ReplayError::ObservationLength {
                expected: self.width,
                got: if t.state.len() != self.width { t.state.len() } else { t.next_state.len() },
            });
        }
        let slot = self.next;
        self.pushes += 1;
        self.data[slot] = Some(t);
        self.stamps[slot] = self.pushes;
        self.tree.set(slot, self.max_leaf);
        self.next = (self.next + 1) % self.config.capacity;
        self.len = (self.len + 1).min(self.config.capacity);
        Ok(SampleIndex { slot, stamp: self.pushes })
    }

    fn advance_beta(&mut self) {
        self.beta = (self.beta + self.config.beta_increment).min(1.0);
    }

    /// Proportional stratified sample of `min(m, len)` transitions.
    pub fn sample<R: Rng + ?Sized>(&mut self, m: usize, rng: &mut R) -> Result<SampledBatch, ReplayError> {
        if self.len == 0 {
            return Err(ReplayError::Empty);
        }
        let n = m.min(self.len).max(1);
        let total = self.tree.total();
        let segment = total / n as f64;
        let beta = self.beta;
        let mut indices = Vec::with_capacity(n);
        let mut probabilities = Vec::with_capacity(n);
        for i in 0..n {
            let mass = (i as f64 + rng.gen::<f64>()) * segment;
            let slot = self.tree.find(mass.min(total));
            let p = self.tree.leaf(slot) / total;
            indices.push(SampleIndex { slot, stamp: self.stamps[slot] });
            probabilities.push(p);
        }
        let weights = importance_weights(&probabilities, self.len, beta);
        self.advance_beta();
        Ok(SampledBatch { indices, weights, probabilities, beta })
    }

    /// Uniform sample with replacement; all weights are 1.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<SampledBatch, ReplayError> {
        if self.len == 0 {
            return Err(ReplayError::Empty);
        }
        let n = m.min(self.len).max(1);
        let indices: Vec<SampleIndex> = (0..n)
            .map(|_| {
                let slot = rng.gen_range(0..self.len);
                SampleIndex { slot, stamp: self.stamps[slot] }
            })
            .collect();
        Ok(SampledBatch {
            indices,
            weights: vec![1.0; n],
            probabilities: vec![1.0 / self.len as f64; n],
            beta: self.beta,
        })
    }

    /// Sets each leaf to `(|delta| + epsilon)^alpha`; stale indices are skipped.
    pub fn update_priorities(&mut self, indices: &[SampleIndex], deltas: &[f64]) {
        debug_assert_eq!(indices.len(), deltas.len());
        for (idx, delta) in indices.iter().zip(deltas) {
            if self.stamps.get(idx.slot) != Some(&idx.stamp) || self.data[idx.slot].is_none() {
                self.stale_skips += 1;
                continue;
            }
            let leaf = (delta.abs() + self.config.epsilon).powf(self.config.alpha);
            self.max_leaf = self.max_leaf.max(leaf);
            self.tree.set(idx.slot, leaf);
        }
    }
}
