use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3};
use rand::Rng;

use super::projection::categorical_project;
use super::schedule::epsilon_at;
use super::{AgentConfig, AgentError};
use crate::nn::checkpoint::{read_f64s, write_f64s};
use crate::nn::{load_network, save_network, InputScaling, NoiseState, OptimizerState, QNetwork, Support};
use crate::replay::{PriorityBuffer, SampledBatch, Transition};

const LEARNER_MAGIC: &[u8; 8] = b"SDQNLRN\0";
const LEARNER_VERSION: u32 = 1;

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Bootstrap targets for one batch.
#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    /// Projected target distribution per sample.
    Distributions(Vec<Vec<f64>>),
    /// Scalar TD target per sample.
    Scalars(Vec<f64>),
}

/// Noise realizations used when building targets: `selection` for the
/// network picking the bootstrap action, `evaluation` for the target network.
#[derive(Clone, Debug)]
pub struct TargetNoise {
    pub selection: NoiseState,
    pub evaluation: NoiseState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub loss: f64,
    pub td_errors: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Learner {
    config: AgentConfig,
    support: Support,
    scaling: InputScaling,
    online: QNetwork,
    target: QNetwork,
    optimizer: OptimizerState,
    buffer: PriorityBuffer,
    frames: u64,
    episodes: u64,
    updates: u64,
}

impl Learner {
    pub fn new<R: Rng + ?Sized>(
        config: AgentConfig,
        input: usize,
        actions: usize,
        rng: &mut R,
    ) -> Result<Self, AgentError> {
        config.validate()?;
        let online = QNetwork::new(config.network_shape(input, actions), rng)?;
        Self::with_network(config, online, actions)
    }

    /// Wraps an existing online network; the target starts as an exact copy.
    pub fn with_network(config: AgentConfig, online: QNetwork, actions: usize) -> Result<Self, AgentError> {
        config.validate()?;
        let input = online.shape().input;
        if *online.shape() != config.network_shape(input, actions) {
            return Err(AgentError::Config(format!(
                "network {:?} does not match the agent configuration",
                online.shape()
            )));
        }
        let support = config.support.build()?;
        let scaling = InputScaling { count_scale: config.network.count_scale, phase_scale: actions as f64 };
        let optimizer = OptimizerState::new(config.adam(), online.param_count());
        let buffer = PriorityBuffer::new(config.replay, input)?;
        Ok(Learner {
            target: online.clone(),
            online,
            support,
            scaling,
            optimizer,
            buffer,
            frames: 0,
            episodes: 0,
            updates: 0,
            config,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn scaling(&self) -> InputScaling {
        self.scaling
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn online_mut(&mut self) -> &mut QNetwork {
        &mut self.online
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn target_mut(&mut self) -> &mut QNetwork {
        &mut self.target
    }

    pub fn buffer(&self) -> &PriorityBuffer {
        &self.buffer
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn epsilon(&self) -> f64 {
        epsilon_at(self.frames, &self.config.exploration, self.config.toggles.noisy)
    }

    /// Current exploration beta of the replay buffer (1 in uniform mode).
    pub fn beta(&self) -> f64 {
        if self.config.toggles.per {
            self.buffer.beta()
        } else {
            1.0
        }
    }

    fn support_opt(&self) -> Option<&Support> {
        self.config.toggles.distributional.then_some(&self.support)
    }

    fn q_row(&self, net: &QNetwork, obs: &[f64]) -> Result<Vec<f64>, AgentError> {
        let input = Array2::from_shape_vec((1, obs.len()), obs.to_vec())
            .map_err(|e| AgentError::Config(e.to_string()))?;
        let pass = net.forward(input.view())?;
        Ok(pass.q_values(self.support_opt()).row(0).to_vec())
    }

    /// Action-values of the online network under its current noise.
    pub fn q_values(&self, obs: &[f64]) -> Result<Vec<f64>, AgentError> {
        self.q_row(&self.online, obs)
    }

    /// Epsilon-greedy (or noisy-greedy) action for training.
    pub fn select_action<R: Rng + ?Sized>(&mut self, obs: &[f64], rng: &mut R) -> Result<usize, AgentError> {
        let actions = self.online.shape().actions;
        let eps = self.epsilon();
        if eps > 0.0 && rng.gen::<f64>() < eps {
            return Ok(rng.gen_range(0..actions));
        }
        if self.config.toggles.noisy {
            self.online.sample_noise(rng);
        }
        Ok(argmax(self.q_values(obs)?))
    }

    /// Deterministic greedy action with all noise switched off.
    pub fn greedy_action(&mut self, obs: &[f64]) -> Result<usize, AgentError> {
        self.online.zero_noise();
        Ok(argmax(self.q_values(obs)?))
    }

    pub fn remember(&mut self, t: Transition) -> Result<(), AgentError> {
        self.buffer.push(t)?;
        Ok(())
    }

    /// Advances the frame counter, syncing the target network whenever a
    /// multiple of the sync period is reached.
    pub fn advance_frames(&mut self, n: u64) {
        let period = self.config.target_sync;
        let before = self.frames / period;
        self.frames += n;
        if self.frames / period > before {
            self.sync_target();
        }
    }

    pub fn end_episode(&mut self) {
        self.episodes += 1;
    }

    pub fn sync_target(&mut self) {
        self.target.clone_from(&self.online);
    }

    /// Bootstrap targets for `batch`. The selecting network is the online
    /// network under double Q-learning and the target network otherwise;
    /// the target network always evaluates.
    pub fn compute_targets(&mut self, batch: &[&Transition], noise: &TargetNoise) -> Result<Targets, AgentError> {
        let next = stack(batch.iter().map(|t| t.next_state.as_slice()), self.online.shape().input);
        let selector = if self.config.toggles.double { &mut self.online } else { &mut self.target };
        selector.set_noise(&noise.selection)?;
        let support = self.config.toggles.distributional.then_some(&self.support);
        let chosen: Vec<usize> = {
            let q = selector.forward(next.view())?.q_values(support);
            q.rows().into_iter().map(|r| argmax(r.iter().copied())).collect()
        };
        self.target.set_noise(&noise.evaluation)?;
        let eval = self.target.forward(next.view())?;
        let gamma = self.config.gamma;
        if self.config.toggles.distributional {
            let probs = eval.probs();
            let mut out = Vec::with_capacity(batch.len());
            for (i, (t, &b)) in batch.iter().zip(&chosen).enumerate() {
                let p: Vec<f64> = probs.slice(ndarray::s![i, b, ..]).to_vec();
                out.push(categorical_project(t.reward, gamma, t.terminal, &p, &self.support)?);
            }
            Ok(Targets::Distributions(out))
        } else {
            let out = batch
                .iter()
                .zip(&chosen)
                .enumerate()
                .map(|(i, (t, &b))| if t.terminal { t.reward } else { t.reward + gamma * eval.out[[i, b, 0]] })
                .collect();
            Ok(Targets::Scalars(out))
        }
    }

    /// Loss, TD errors and parameter gradients of the online network (under
    /// its current noise) against fixed `targets` with IS `weights`.
    pub fn loss_and_gradient(
        &self,
        batch: &[&Transition],
        targets: &Targets,
        weights: &[f64],
    ) -> Result<(TrainReport, Vec<f64>), AgentError> {
        let states = stack(batch.iter().map(|t| t.state.as_slice()), self.online.shape().input);
        let pass = self.online.forward(states.view())?;
        let (n, actions, width) = pass.out.dim();
        let scale = 1.0 / n as f64;
        let mut grad = Array3::<f64>::zeros((n, actions, width));
        let mut loss = 0.0;
        let mut td = Vec::with_capacity(n);
        match targets {
            Targets::Distributions(m) => {
                let atoms = self.support.atoms();
                for (i, t) in batch.iter().enumerate() {
                    let a = t.action;
                    let mut ce = 0.0;
                    let mut gap = 0.0;
                    for j in 0..width {
                        let logp = pass.out[[i, a, j]];
                        ce -= m[i][j] * logp;
                        gap += atoms[j] * (m[i][j] - logp.exp());
                        grad[[i, a, j]] = -weights[i] * m[i][j] * scale;
                    }
                    loss += weights[i] * ce * scale;
                    td.push(gap);
                }
            }
            Targets::Scalars(y) => {
                for (i, t) in batch.iter().enumerate() {
                    let delta = y[i] - pass.out[[i, t.action, 0]];
                    loss += weights[i] * delta * delta * scale;
                    grad[[i, t.action, 0]] = -2.0 * weights[i] * delta * scale;
                    td.push(delta);
                }
            }
        }
        let params = self.online.backward(&pass, grad.view())?;
        Ok((TrainReport { loss, td_errors: td }, params))
    }

    /// One optimization step, or `None` while the buffer holds fewer than
    /// the learn-start number of transitions.
    pub fn train_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Option<TrainReport>, AgentError> {
        if self.buffer.len() < self.config.learn_start.max(1) {
            return Ok(None);
        }
        let m = self.config.batch_size;
        let sampled: SampledBatch =
            if self.config.toggles.per { self.buffer.sample(m, rng)? } else { self.buffer.sample_uniform(m, rng)? };

        // Three independent realizations: training, evaluation, selection.
        let (train_noise, noise) = if self.config.toggles.noisy {
            self.online.sample_noise(rng);
            let train = self.online.noise();
            self.online.sample_noise(rng);
            let evaluation = self.online.noise();
            self.online.sample_noise(rng);
            let selection = self.online.noise();
            (train, TargetNoise { selection, evaluation })
        } else {
            let none = self.online.noise();
            (none.clone(), TargetNoise { selection: none.clone(), evaluation: none })
        };

        let batch: Vec<Transition> = sampled
            .indices
            .iter()
            .map(|idx| self.buffer.transition(*idx).cloned().expect("sampled slot is populated"))
            .collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let targets = self.compute_targets(&refs, &noise)?;
        self.online.set_noise(&train_noise)?;
        let (report, grads) = self.loss_and_gradient(&refs, &targets, &sampled.weights)?;
        self.optimizer.apply(self.online.params_mut(), &grads)?;
        if self.config.toggles.per {
            self.buffer.update_priorities(&sampled.indices, &report.td_errors);
        }
        self.updates += 1;
        Ok(Some(report))
    }

    /// Writes `network.bin` (online network) and `learner.bin` (counters,
    /// target parameters, optimizer moments) into `dir`.
    pub fn save_checkpoint(&self, dir: &Path) -> Result<(), AgentError> {
        std::fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("network.bin"))?);
        save_network(&self.online, self.scaling, &mut w)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("learner.bin"))?);
        w.write_all(LEARNER_MAGIC)?;
        w.write_all(&LEARNER_VERSION.to_le_bytes())?;
        for c in [self.frames, self.episodes, self.updates, self.optimizer.step] {
            w.write_all(&c.to_le_bytes())?;
        }
        write_f64s(&mut w, self.target.params())?;
        write_f64s(&mut w, &self.optimizer.first)?;
        write_f64s(&mut w, &self.optimizer.second)?;
        w.flush()?;
        Ok(())
    }

    /// Restores a learner from `save_checkpoint` output. The replay buffer
    /// starts empty. A missing `learner.bin` yields a fresh optimizer and a
    /// target equal to the online network.
    pub fn load_checkpoint(config: AgentConfig, input: usize, actions: usize, dir: &Path) -> Result<Self, AgentError> {
        let expected = config.network_shape(input, actions);
        let mut r = BufReader::new(File::open(dir.join("network.bin"))?);
        let (online, _) = load_network(&mut r, Some(&expected))?;
        let mut learner = Self::with_network(config, online, actions)?;
        let path = dir.join("learner.bin");
        if !path.exists() {
            return Ok(learner);
        }
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != LEARNER_MAGIC {
            return Err(AgentError::Checkpoint("bad magic in learner.bin".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        if u32::from_le_bytes(word) != LEARNER_VERSION {
            return Err(AgentError::Checkpoint("unsupported learner.bin version".into()));
        }
        let mut counters = [0u64; 4];
        for c in &mut counters {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *c = u64::from_le_bytes(b);
        }
        let target = read_f64s(&mut r)?;
        let first = read_f64s(&mut r)?;
        let second = read_f64s(&mut r)?;
        let n = learner.online.param_count();
        if target.len() != n || first.len() != n || second.len() != n {
            return Err(AgentError::Checkpoint(format!("learner.bin arrays do not have {n} entries")));
        }
        learner.target.params_mut().copy_from_slice(&target);
        learner.frames = counters[0];
        learner.episodes = counters[1];
        learner.updates = counters[2];
        learner.optimizer.step = counters[3];
        learner.optimizer.first = first;
        learner.optimizer.second = second;
        Ok(learner)
    }
}

fn stack<'a>(rows: impl Iterator<Item = &'a [f32]>, width: usize) -> Array2<f64> {
    let data: Vec<f64> = rows.flat_map(|r| r.iter().map(|&x| x as f64)).collect();
    let n = data.len() / width;
    Array2::from_shape_vec((n, width), data).expect("rows have the observation width")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::Toggles;
    use crate::nn::NetworkShape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small(toggles: Toggles) -> AgentConfig {
        let mut c = AgentConfig { toggles, learn_start: 4, batch_size: 4, target_sync: 10, ..Default::default() };
        c.network.fc_units = 8;
        c.network.fc_layers = 1;
        c.network.stream_units = 6;
        c.network.stream_layers = 1;
        c.replay.capacity = 64;
        c
    }

    fn transition(rng: &mut ChaCha8Rng, width: usize, actions: usize) -> Transition {
        Transition {
            state: (0..width).map(|_| rng.gen::<f32>()).collect(),
            action: rng.gen_range(0..actions),
            reward: rng.gen_range(-1.0..1.0),
            next_state: (0..width).map(|_| rng.gen::<f32>()).collect(),
            terminal: rng.gen_bool(0.2),
        }
    }

    /// Scalar network whose single output layer has zero weights and the
    /// given biases, so Q(s, .) = biases for every state.
    fn constant_q(config: &AgentConfig, input: usize, q: &[f64]) -> QNetwork {
        let shape: NetworkShape = config.network_shape(input, q.len());
        let mut net = QNetwork::zeroed(shape).unwrap();
        let last = net.layers().last().copied().unwrap();
        net.params_mut()[last.bias..last.bias + q.len()].copy_from_slice(q);
        net
    }

    fn linear_config() -> AgentConfig {
        let mut c = small(Toggles::all(false));
        c.network.fc_layers = 0;
        c.network.stream_layers = 0;
        c
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax([0.2, 0.7]), 1);
        assert_eq!(argmax([0.5, 0.5]), 0);
        assert_eq!(argmax([1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn greedy_picks_the_larger_q() {
        let c = linear_config();
        let net = constant_q(&c, 3, &[0.2, 0.7]);
        let mut l = Learner::with_network(c, net, 2).unwrap();
        l.frames = u64::MAX / 2;
        l.config.exploration.final_value = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(l.select_action(&[0.1, 0.2, 0.3], &mut rng).unwrap(), 1);
        }
        let tie = constant_q(&l.config, 3, &[0.4, 0.4]);
        l.online = tie;
        assert_eq!(l.greedy_action(&[0.0; 3]).unwrap(), 0);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let c = linear_config();
        let net = constant_q(&c, 3, &[0.0, 1.0, 2.0, 3.0]);
        let mut l = Learner::with_network(c, net, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[l.select_action(&[0.0; 3], &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn double_q_uses_online_choice_evaluated_by_target() {
        // Online prefers action 0, target prefers action 1.
        let mut c = linear_config();
        c.toggles.double = true;
        c.gamma = 0.9;
        let online = constant_q(&c, 2, &[5.0, 1.0]);
        let mut l = Learner::with_network(c.clone(), online, 2).unwrap();
        l.target = constant_q(&c, 2, &[2.0, 3.0]);
        let t = Transition { state: vec![0.0; 2], action: 0, reward: 0.5, next_state: vec![0.0; 2], terminal: false };
        let noise = TargetNoise { selection: l.online.noise(), evaluation: l.online.noise() };
        assert_eq!(l.compute_targets(&[&t], &noise).unwrap(), Targets::Scalars(vec![0.5 + 0.9 * 2.0]));

        l.config.toggles.double = false;
        assert_eq!(l.compute_targets(&[&t], &noise).unwrap(), Targets::Scalars(vec![0.5 + 0.9 * 3.0]));

        let end = Transition { terminal: true, ..t };
        assert_eq!(l.compute_targets(&[&end], &noise).unwrap(), Targets::Scalars(vec![0.5]));
    }

    #[test]
    fn terminal_distribution_ignores_next_state() {
        let c = small(Toggles::all(true));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut l = Learner::new(c, 5, 2, &mut rng).unwrap();
        let mut t = transition(&mut rng, 5, 2);
        t.terminal = true;
        t.reward = 2.0;
        l.online.sample_noise(&mut rng);
        let noise = TargetNoise { selection: l.online.noise(), evaluation: l.online.noise() };
        let Targets::Distributions(m) = l.compute_targets(&[&t], &noise).unwrap() else { panic!() };
        assert!((m[0][30] - 1.0).abs() < 1e-12);
        t.next_state.iter_mut().for_each(|x| *x += 1.0);
        assert_eq!(l.compute_targets(&[&t], &noise).unwrap(), Targets::Distributions(m));
    }

    #[test]
    fn matched_target_has_zero_kl_gradient() {
        // With the target equal to the online output the cross-entropy is the
        // target's entropy, and its gradient through the softmax vanishes.
        let c = small(Toggles { noisy: false, ..Toggles::all(true) });
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = Learner::new(c, 5, 2, &mut rng).unwrap();
        let ts: Vec<Transition> = (0..4).map(|_| transition(&mut rng, 5, 2)).collect();
        let refs: Vec<&Transition> = ts.iter().collect();
        let states = stack(refs.iter().map(|t| t.state.as_slice()), 5);
        let probs = l.online.forward(states.view()).unwrap().probs();
        let m: Vec<Vec<f64>> = refs.iter().enumerate().map(|(i, t)| probs.slice(ndarray::s![i, t.action, ..]).to_vec()).collect();
        let entropy: f64 = m.iter().map(|p| -p.iter().map(|x| x * x.ln()).sum::<f64>()).sum::<f64>() / 4.0;
        let (report, grads) = l.loss_and_gradient(&refs, &Targets::Distributions(m), &[1.0; 4]).unwrap();
        assert!((report.loss - entropy).abs() < 1e-12);
        assert!(grads.iter().all(|g| g.abs() < 1e-9));
        assert!(report.td_errors.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn learn_start_gates_training() {
        let c = small(Toggles::all(true));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut l = Learner::new(c, 5, 2, &mut rng).unwrap();
        for _ in 0..3 {
            let t = transition(&mut rng, 5, 2);
            l.remember(t).unwrap();
            assert_eq!(l.train_step(&mut rng).unwrap(), None);
        }
        l.remember(transition(&mut rng, 5, 2)).unwrap();
        assert!(l.train_step(&mut rng).unwrap().is_some());
        assert_eq!(l.updates(), 1);
    }

    #[test]
    fn loss_falls_on_a_frozen_batch() {
        for toggles in [Toggles { noisy: false, ..Toggles::all(true) }, Toggles::all(false)] {
            let mut c = small(toggles);
            c.learning_rate = 1e-2;
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let mut l = Learner::new(c, 5, 2, &mut rng).unwrap();
            let ts: Vec<Transition> = (0..8).map(|_| transition(&mut rng, 5, 2)).collect();
            let refs: Vec<&Transition> = ts.iter().collect();
            let none = l.online.noise();
            let targets = l.compute_targets(&refs, &TargetNoise { selection: none.clone(), evaluation: none }).unwrap();
            let w = vec![1.0; refs.len()];
            let first = l.loss_and_gradient(&refs, &targets, &w).unwrap().0.loss;
            let mut last = first;
            for _ in 0..200 {
                let (r, g) = l.loss_and_gradient(&refs, &targets, &w).unwrap();
                last = r.loss;
                l.optimizer.apply(l.online.params_mut(), &g).unwrap();
            }
            assert!(last < first, "{toggles:?}: {first} -> {last}");
        }
    }

    #[test]
    fn target_syncs_on_period_multiples() {
        let c = small(Toggles::all(true));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut l = Learner::new(c, 5, 2, &mut rng).unwrap();
        for _ in 0..8 {
            l.remember(transition(&mut rng, 5, 2)).unwrap();
        }
        l.train_step(&mut rng).unwrap();
        l.advance_frames(6);
        assert_ne!(l.target.params(), l.online.params());
        l.advance_frames(6);
        assert_eq!(l.target.params(), l.online.params());
        l.train_step(&mut rng).unwrap();
        l.advance_frames(15);
        assert_eq!(l.target.params(), l.online.params());
        assert_eq!(l.frames(), 27);
    }

    #[test]
    fn checkpoint_round_trip() {
        let c = small(Toggles::all(true));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut l = Learner::new(c.clone(), 5, 2, &mut rng).unwrap();
        for _ in 0..8 {
            l.remember(transition(&mut rng, 5, 2)).unwrap();
        }
        l.train_step(&mut rng).unwrap();
        l.advance_frames(3);
        l.end_episode();
        let dir = tempfile::tempdir().unwrap();
        l.save_checkpoint(dir.path()).unwrap();
        let back = Learner::load_checkpoint(c.clone(), 5, 2, dir.path()).unwrap();
        assert_eq!(back.online.params(), l.online.params());
        assert_eq!(back.target.params(), l.target.params());
        assert_eq!(back.optimizer.first, l.optimizer.first);
        assert_eq!((back.frames(), back.episodes(), back.updates()), (3, 1, 1));

        let other = AgentConfig { toggles: Toggles::all(false), ..c };
        assert!(Learner::load_checkpoint(other, 5, 2, dir.path()).is_err());
    }
}
