use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use super::metrics::{mean, median, smooth, write_smoothed, EpisodeRecord, MetricsWriter};
use super::HarnessError;
use crate::agent::{Learner, Toggles};
use crate::baselines::{Controller, Decision, FixedTime, FixedTimePlan, RandomPolicy, Sotl};
use crate::replay::Transition;
use crate::reward::{action_reward, episodic_reward, total_reward, ActionWindow, RewardParams};
use crate::sim::{FlowModel, IntersectionSpec, LaneFlow, Observation, TrafficEnv, TrafficPreset};

/// Traffic streams and agent randomness come from separate ChaCha streams of
/// the run seed, so every policy run with one seed faces the same arrivals.
fn env_rng(seed: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(0);
    r
}

fn agent_rng(seed: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(1);
    r
}

fn create_dir(path: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(path).map_err(|e| HarnessError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Heavy east-west traffic, light north-south.
    One,
    /// The mirror of `One`.
    Two,
    /// Normal traffic on every lane.
    Three,
}

impl Scenario {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Scenario::One),
            2 => Some(Scenario::Two),
            3 => Some(Scenario::Three),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Scenario::One => 1,
            Scenario::Two => 2,
            Scenario::Three => 3,
        }
    }
}

pub fn scenario_flow(spec: &IntersectionSpec, scenario: Scenario, episode_length: u64) -> Result<FlowModel, HarnessError> {
    let lanes: Vec<LaneFlow> = (0..spec.lane_count())
        .map(|lane| {
            let ew = spec.lane_approach(lane).is_east_west();
            let preset = match scenario {
                Scenario::One if ew => TrafficPreset::High,
                Scenario::One => TrafficPreset::Low,
                Scenario::Two if ew => TrafficPreset::Low,
                Scenario::Two => TrafficPreset::High,
                Scenario::Three => TrafficPreset::Normal,
            };
            preset.bounds()
        })
        .collect();
    Ok(FlowModel::new(lanes, episode_length)?)
}

struct Step<'a> {
    state: &'a [f64],
    action: usize,
    reward: f64,
    next_state: &'a [f64],
    terminal: bool,
    frames: u32,
}

trait Policy {
    fn act(&mut self, obs: &[f64], at: &Decision<'_>) -> Result<usize, HarnessError>;

    fn learn(&mut self, _step: Step<'_>) -> Result<(), HarnessError> {
        Ok(())
    }
}

struct Training<'a> {
    learner: &'a mut Learner,
    rng: &'a mut ChaCha8Rng,
}

impl Policy for Training<'_> {
    fn act(&mut self, obs: &[f64], _at: &Decision<'_>) -> Result<usize, HarnessError> {
        Ok(self.learner.select_action(obs, self.rng)?)
    }

    fn learn(&mut self, step: Step<'_>) -> Result<(), HarnessError> {
        let to_f32 = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<f32>>();
        self.learner.remember(Transition {
            state: to_f32(step.state),
            action: step.action,
            reward: step.reward,
            next_state: to_f32(step.next_state),
            terminal: step.terminal,
        })?;
        self.learner.advance_frames(step.frames as u64);
        self.learner.train_step(self.rng)?;
        Ok(())
    }
}

struct Greedy<'a>(&'a mut Learner);

impl Policy for Greedy<'_> {
    fn act(&mut self, obs: &[f64], _at: &Decision<'_>) -> Result<usize, HarnessError> {
        Ok(self.0.greedy_action(obs)?)
    }
}

struct Scripted<C: Controller> {
    controller: C,
    rng: ChaCha8Rng,
}

impl<C: Controller> Policy for Scripted<C> {
    fn act(&mut self, _obs: &[f64], at: &Decision<'_>) -> Result<usize, HarnessError> {
        Ok(self.controller.decide(at, &mut self.rng))
    }
}

#[derive(Default)]
struct EpisodeStats {
    omega: u64,
    reward: f64,
    actions: u32,
    changes: u32,
    departures: u32,
}

fn play<P: Policy>(
    env: &mut TrafficEnv,
    rng: &mut ChaCha8Rng,
    policy: &mut P,
    count_scale: f64,
    reward: &RewardParams,
) -> Result<EpisodeStats, HarnessError> {
    let green = env.timings().green_min as u64;
    let mut x = env.reset(rng)?.normalized(count_scale);
    let mut group_waiting = vec![0u32; env.action_count()];
    let mut green_elapsed = 0u64;
    let mut stats = EpisodeStats::default();
    loop {
        let at = Decision {
            clock: env.state().clock,
            phase: env.state().phase,
            green_elapsed,
            group_waiting: &group_waiting,
        };
        let action = policy.act(&x, &at)?;
        let out = env.apply_action(action, rng)?;
        green_elapsed = if out.phase_changed { green } else { green_elapsed + green };
        if let Some(last) = out.green_frames.last() {
            group_waiting.clone_from(&last.group_waiting);
        }
        let done = env.is_done();
        let ra = action_reward(&ActionWindow::from_outcome(&out), reward);
        let re = if done { episodic_reward(env.episode_wait() as f64, reward) } else { 0.0 };
        let r = total_reward(ra, re, done);
        let next = env.observe(&out)?.normalized(count_scale);
        policy.learn(Step { state: &x, action, reward: r, next_state: &next, terminal: done, frames: out.frames_elapsed })?;
        stats.reward += r;
        stats.actions += 1;
        stats.changes += out.phase_changed as u32;
        stats.departures += out.departures;
        x = next;
        if done {
            break;
        }
    }
    stats.omega = env.episode_wait();
    Ok(stats)
}

fn record(episode: usize, s: &EpisodeStats, epsilon: f64, beta: f64, started: Option<Instant>) -> EpisodeRecord {
    EpisodeRecord {
        episode,
        omega_t: s.omega,
        reward: s.reward,
        actions_taken: s.actions,
        phase_changes: s.changes,
        departures: s.departures,
        epsilon,
        beta,
        wallclock_ms: started.map_or(0, |t| t.elapsed().as_millis() as u64),
    }
}

fn build_env(config: &RunConfig, flow: Option<FlowModel>) -> Result<TrafficEnv, HarnessError> {
    let spec = config.intersection()?;
    let flow = match flow {
        Some(f) => f,
        None => config.flow(&spec)?,
    };
    Ok(TrafficEnv::new(spec, config.timings, flow)?)
}

fn observation_len(env: &TrafficEnv) -> usize {
    Observation::flat_len(env.action_count(), env.timings().green_min)
}

#[derive(Clone, Debug)]
pub struct TrainingOutput {
    pub records: Vec<EpisodeRecord>,
    pub metrics: PathBuf,
    pub final_checkpoint: PathBuf,
}

/// Trains from scratch, writing `metrics.csv`, `smoothed.csv`, the resolved
/// `config.toml` and checkpoints under the configured output directory.
/// `on_episode` sees every record as it is written.
pub fn run_training(
    config: &RunConfig,
    mut on_episode: impl FnMut(&EpisodeRecord),
) -> Result<TrainingOutput, HarnessError> {
    config.validate()?;
    let out = config.run.out_dir.clone();
    create_dir(&out)?;
    write_text(&out.join("config.toml"), &config.to_toml())?;
    let mut env = build_env(config, None)?;
    if config.run.frame_log {
        let path = out.join("frames.csv");
        let file = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
        env.set_frame_log(Box::new(BufWriter::new(file)))?;
    }
    let mut erng = env_rng(config.run.seed);
    let mut arng = agent_rng(config.run.seed);
    let agent = config.agent_config();
    let mut learner = Learner::new(agent, observation_len(&env), env.action_count(), &mut arng)?;
    let metrics_path = out.join("metrics.csv");
    let mut writer = MetricsWriter::create(&metrics_path)?;
    let ckpt_root = out.join("checkpoints");
    let clock = config.run.record_wallclock.then(Instant::now);
    let noisy = config.agent.toggles.noisy;
    let mut records = Vec::with_capacity(config.run.episodes);
    for e in 0..config.run.episodes {
        let stats = {
            let mut policy = Training { learner: &mut learner, rng: &mut arng };
            play(&mut env, &mut erng, &mut policy, config.network.count_scale, &config.reward)?
        };
        learner.end_episode();
        let explore = if noisy { learner.online().mean_noise_scale() } else { learner.epsilon() };
        let rec = record(e, &stats, explore, learner.beta(), clock);
        writer.write(&rec)?;
        on_episode(&rec);
        records.push(rec);
        let interval = config.run.checkpoint_interval;
        if interval > 0 && (e + 1) % interval == 0 && e + 1 < config.run.episodes {
            learner.save_checkpoint(&ckpt_root.join(format!("episode_{:06}", e + 1)))?;
        }
    }
    let final_checkpoint = ckpt_root.join("final");
    learner.save_checkpoint(&final_checkpoint)?;
    let raw: Vec<f64> = records.iter().map(|r| r.omega_t as f64).collect();
    write_smoothed(&out.join("smoothed.csv"), &raw)?;
    Ok(TrainingOutput { records, metrics: metrics_path, final_checkpoint })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub policy: String,
    pub scenario: Option<Scenario>,
    pub seeds: usize,
    pub episodes: usize,
    pub mean_omega: f64,
    pub mean_reward: f64,
    /// Mean wait per seed, in seed order.
    pub per_seed_omega: Vec<f64>,
}

fn write_summary(path: &Path, s: &EvalSummary) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["policy", "scenario", "seeds", "episodes", "mean_omega_T", "mean_reward"])?;
    w.write_record([
        s.policy.clone(),
        s.scenario.map_or("config".to_string(), |x| x.number().to_string()),
        s.seeds.to_string(),
        s.episodes.to_string(),
        s.mean_omega.to_string(),
        s.mean_reward.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

/// Plays `episodes` episodes for each of `seeds` consecutive seeds and
/// writes all rows to one metrics file.
fn evaluate<P: Policy>(
    config: &RunConfig,
    flow: Option<FlowModel>,
    policy: &mut P,
    seeds: usize,
    episodes: usize,
    metrics: &Path,
    name: &str,
    scenario: Option<Scenario>,
) -> Result<EvalSummary, HarnessError> {
    let mut env = build_env(config, flow)?;
    let mut writer = MetricsWriter::create(metrics)?;
    let clock = config.run.record_wallclock.then(Instant::now);
    let (mut omegas, mut rewards, mut per_seed) = (Vec::new(), Vec::new(), Vec::new());
    for s in 0..seeds {
        let mut rng = env_rng(config.run.seed + s as u64);
        let mut seed_omega = Vec::with_capacity(episodes);
        for e in 0..episodes {
            let stats = play(&mut env, &mut rng, policy, config.network.count_scale, &config.reward)?;
            writer.write(&record(s * episodes + e, &stats, 0.0, 0.0, clock))?;
            seed_omega.push(stats.omega as f64);
            rewards.push(stats.reward);
        }
        per_seed.push(mean(&seed_omega));
        omegas.extend(seed_omega);
    }
    Ok(EvalSummary {
        policy: name.to_string(),
        scenario,
        seeds,
        episodes,
        mean_omega: mean(&omegas),
        mean_reward: mean(&rewards),
        per_seed_omega: per_seed,
    })
}

/// Greedy, noise-free evaluation of a saved learner. Without a scenario the
/// configured traffic is used.
pub fn run_eval(config: &RunConfig, checkpoint: &Path, scenario: Option<Scenario>) -> Result<EvalSummary, HarnessError> {
    config.validate()?;
    let spec = config.intersection()?;
    let actions = spec.action_count();
    let input = Observation::flat_len(actions, config.timings.green_min);
    let mut learner = Learner::load_checkpoint(config.agent_config(), input, actions, checkpoint)?;
    let flow = scenario.map(|s| scenario_flow(&spec, s, config.environment.episode_length)).transpose()?;
    let dir = config.run.out_dir.join(eval_dir_name(scenario));
    create_dir(&dir)?;
    let summary = evaluate(
        config,
        flow,
        &mut Greedy(&mut learner),
        config.run.eval_seeds,
        config.run.eval_episodes,
        &dir.join("metrics.csv"),
        "agent",
        scenario,
    )?;
    write_summary(&dir.join("summary.csv"), &summary)?;
    Ok(summary)
}

fn eval_dir_name(scenario: Option<Scenario>) -> String {
    scenario.map_or("eval".to_string(), |s| format!("eval_scenario{}", s.number()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum BaselineKind {
    FixedTime(Option<FixedTimePlan>),
    Sotl,
    Random,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::FixedTime(_) => "ft",
            BaselineKind::Sotl => "sotl",
            BaselineKind::Random => "random",
        }
    }
}

/// Runs a baseline controller. With a scenario it evaluates over the
/// configured seeds; otherwise it replays the training traffic of
/// `run.seed` for `run.episodes` episodes. Writes
/// `baseline_<kind>[_scenarioN]/metrics.csv` and `summary.csv`.
pub fn run_baseline(
    config: &RunConfig,
    kind: &BaselineKind,
    scenario: Option<Scenario>,
) -> Result<(EvalSummary, Vec<EpisodeRecord>), HarnessError> {
    config.validate()?;
    let spec = config.intersection()?;
    let flow = scenario.map(|s| scenario_flow(&spec, s, config.environment.episode_length)).transpose()?;
    let mut name = format!("baseline_{}", kind.name());
    if let Some(s) = scenario {
        name.push_str(&format!("_scenario{}", s.number()));
    }
    let dir = config.run.out_dir.join(&name);
    create_dir(&dir)?;
    let (seeds, episodes) = match scenario {
        Some(_) => (config.run.eval_seeds, config.run.eval_episodes),
        None => (1, config.run.episodes),
    };
    let metrics = dir.join("metrics.csv");
    let rng = agent_rng(config.run.seed);
    let summary = match kind {
        BaselineKind::FixedTime(plan) => {
            let plan = match plan {
                Some(p) => {
                    p.validate(spec.action_count(), config.timings.green_min)
                        .map_err(|e| HarnessError::Config(e.to_string()))?;
                    p.clone()
                }
                None => config.ft_plan(&spec)?,
            };
            let mut p = Scripted { controller: FixedTime { plan, timings: config.timings }, rng };
            evaluate(config, flow, &mut p, seeds, episodes, &metrics, kind.name(), scenario)?
        }
        BaselineKind::Sotl => {
            let mut p = Scripted { controller: Sotl { params: config.baselines.sotl }, rng };
            evaluate(config, flow, &mut p, seeds, episodes, &metrics, kind.name(), scenario)?
        }
        BaselineKind::Random => {
            let mut p = Scripted { controller: RandomPolicy { actions: spec.action_count() }, rng };
            evaluate(config, flow, &mut p, seeds, episodes, &metrics, kind.name(), scenario)?
        }
    };
    write_summary(&dir.join("summary.csv"), &summary)?;
    let records = super::metrics::read_metrics(&metrics)?;
    Ok((summary, records))
}

/// Candidate plans: every combination of the configured green multiples for
/// up to three phases, otherwise equal splits plus the proportional default.
fn sweep_plans(config: &RunConfig, spec: &IntersectionSpec) -> Result<Vec<FixedTimePlan>, HarnessError> {
    let g = config.timings.green_min;
    let units = &config.baselines.sweep_units;
    let actions = spec.action_count();
    let mut plans = Vec::new();
    if actions <= 3 {
        let mut idx = vec![0usize; actions];
        loop {
            plans.push(FixedTimePlan::new(idx.iter().enumerate().map(|(p, &i)| (p, units[i] * g)).collect()));
            let mut k = 0;
            while k < actions {
                idx[k] += 1;
                if idx[k] < units.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == actions {
                break;
            }
        }
    } else {
        for &u in units {
            plans.push(FixedTimePlan::new((0..actions).map(|p| (p, u * g)).collect()));
        }
        plans.push(config.ft_plan(spec)?);
    }
    Ok(plans)
}

/// Evaluates every swept fixed-time plan on the training traffic of
/// `run.seed` over `episodes` episodes, scoring each by the mean wait of
/// its last `tail` episodes. Writes `ft_sweep.csv`; results are sorted best
/// first.
pub fn run_ft_sweep(config: &RunConfig, episodes: usize, tail: usize) -> Result<Vec<(FixedTimePlan, f64)>, HarnessError> {
    config.validate()?;
    let spec = config.intersection()?;
    create_dir(&config.run.out_dir)?;
    let mut results = Vec::new();
    for plan in sweep_plans(config, &spec)? {
        let mut env = build_env(config, None)?;
        let mut rng = env_rng(config.run.seed);
        let mut policy =
            Scripted { controller: FixedTime { plan: plan.clone(), timings: config.timings }, rng: agent_rng(config.run.seed) };
        let mut omegas = Vec::with_capacity(episodes);
        for _ in 0..episodes {
            omegas.push(play(&mut env, &mut rng, &mut policy, config.network.count_scale, &config.reward)?.omega as f64);
        }
        let start = episodes.saturating_sub(tail);
        results.push((plan, mean(&omegas[start..])));
    }
    results.sort_by(|a, b| a.1.total_cmp(&b.1));
    let path = config.run.out_dir.join("ft_sweep.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["plan", "mean_omega_T"])?;
    for (plan, m) in &results {
        let text: Vec<String> = plan.entries.iter().map(|(p, g)| format!("{p}:{g}")).collect();
        w.write_record([text.join(" "), m.to_string()])?;
    }
    w.flush()?;
    Ok(results)
}

/// `full`, one `no-<x>` variant per name in `ablate`, and `vanilla`.
pub fn ablation_variants(ablate: &[String]) -> Result<Vec<(String, Toggles)>, HarnessError> {
    let mut out = vec![("full".to_string(), Toggles::all(true))];
    for name in ablate {
        let mut t = Toggles::all(true);
        if !t.set(name, false) {
            return Err(HarnessError::Config(format!(
                "unknown toggle `{name}`; expected one of {}",
                Toggles::NAMES.join(", ")
            )));
        }
        out.push((format!("no-{name}"), t));
    }
    out.push(("vanilla".to_string(), Toggles::all(false)));
    Ok(out)
}

/// Trains every ablation variant for `run.eval_seeds` consecutive seeds into
/// `ablation/<variant>/seed<k>/` and writes `ablation/summary.csv` (median
/// smoothed wait per episode and variant) and `ablation/auc.csv` (area under
/// each smoothed curve over the first `auc_episodes` episodes).
pub fn run_ablation(
    config: &RunConfig,
    ablate: &[String],
    auc_episodes: usize,
    mut on_episode: impl FnMut(&str, u64, &EpisodeRecord),
) -> Result<Vec<(String, Vec<f64>)>, HarnessError> {
    config.validate()?;
    let variants = ablation_variants(ablate)?;
    let root = config.run.out_dir.join("ablation");
    create_dir(&root)?;
    let mut curves: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut aucs = Vec::new();
    for (name, toggles) in &variants {
        let mut per_seed = Vec::new();
        let mut variant_auc: Vec<f64> = Vec::new();
        for s in 0..config.run.eval_seeds {
            let seed = config.run.seed + s as u64;
            let mut c = config.clone();
            c.agent.toggles = *toggles;
            c.run.seed = seed;
            c.run.out_dir = root.join(name).join(format!("seed{seed}"));
            let out = run_training(&c, |r| on_episode(name, seed, r))?;
            let smoothed = smooth(&out.records.iter().map(|r| r.omega_t as f64).collect::<Vec<_>>());
            variant_auc.push(smoothed.iter().take(auc_episodes).sum());
            per_seed.push(smoothed);
        }
        curves.push(per_seed);
        aucs.push((name.clone(), variant_auc));
    }

    let mut w = csv::Writer::from_path(root.join("summary.csv"))?;
    let mut header = vec!["episode".to_string()];
    header.extend(variants.iter().map(|v| v.0.clone()));
    w.write_record(&header)?;
    for e in 0..config.run.episodes {
        let mut row = vec![e.to_string()];
        for per_seed in &curves {
            let vals: Vec<f64> = per_seed.iter().map(|c| c[e]).collect();
            row.push(median(&vals).to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(root.join("auc.csv"))?;
    w.write_record(["variant", "seed", "auc"])?;
    for (name, values) in &aucs {
        for (s, v) in values.iter().enumerate() {
            w.write_record([name.clone(), (config.run.seed + s as u64).to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(aucs)
}
