use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use signal_dqn::agent::Toggles;
use signal_dqn::baselines::FixedTimePlan;
use signal_dqn::harness::{
    emit_plot_data, run_ablation, run_baseline, run_eval, run_ft_sweep, run_training, BaselineKind, EvalSummary,
    HarnessError, RunConfig, Scenario,
};

#[derive(Parser)]
#[command(name = "signal-dqn", version, about = "Traffic signal control with a distributional double-dueling DQN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; defaults apply to every missing field.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<usize>,
    /// Output directory (overrides run.out_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Switch a component off, e.g. `--toggle noisy=off`. Repeatable.
    #[arg(long = "toggle", value_name = "NAME=on|off")]
    toggles: Vec<String>,
    /// Print a progress line every N episodes (0 = quiet).
    #[arg(long, default_value_t = 100)]
    progress: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Train a learner from scratch.
    Train(Common),
    /// Greedy evaluation of a checkpoint directory.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        scenario: Option<u8>,
    },
    /// Train the full model, one variant per switched-off component, and plain DQN.
    /// `--toggle x=off` limits the single-component variants to the named ones.
    Ablate {
        #[command(flatten)]
        common: Common,
        /// Episodes covered by the area-under-curve summary.
        #[arg(long, default_value_t = 1000)]
        auc_episodes: usize,
    },
    /// Run a non-learning controller.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        scenario: Option<u8>,
        /// Fixed-time plan as `phase:green,phase:green,...`.
        #[arg(long)]
        plan: Option<String>,
        /// Sweep fixed-time plans instead, scoring the last N episodes.
        #[arg(long)]
        sweep_tail: Option<usize>,
    },
    /// Turn metrics files into raw/smoothed series (and SVG charts).
    Plot {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "plots")]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ft,
    Sotl,
    Random,
}

fn parse_toggle(spec: &str) -> Result<(String, bool), HarnessError> {
    let bad = || HarnessError::Usage(format!("--toggle expects NAME=on|off, got `{spec}`"));
    let (name, value) = spec.split_once('=').ok_or_else(bad)?;
    let on = match value {
        "on" | "true" => true,
        "off" | "false" => false,
        _ => return Err(bad()),
    };
    if Toggles::all(true).get(name).is_none() {
        return Err(HarnessError::Usage(format!(
            "unknown toggle `{name}`; expected one of {}",
            Toggles::NAMES.join(", ")
        )));
    }
    Ok((name.to_string(), on))
}

fn load(common: &Common) -> Result<RunConfig, HarnessError> {
    let mut config = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        config.run.seed = s;
    }
    if let Some(e) = common.episodes {
        config.run.episodes = e;
    }
    if let Some(o) = &common.out {
        config.run.out_dir = o.clone();
    }
    for t in &common.toggles {
        let (name, on) = parse_toggle(t)?;
        config.agent.toggles.set(&name, on);
    }
    config.validate()?;
    Ok(config)
}

fn scenario(n: Option<u8>) -> Option<Scenario> {
    n.and_then(Scenario::from_number)
}

fn parse_plan(text: &str) -> Result<FixedTimePlan, HarnessError> {
    let entries = text
        .split(',')
        .map(|e| {
            let (p, g) = e.split_once(':').ok_or_else(|| HarnessError::Usage(format!("bad plan entry `{e}`")))?;
            let p = p.trim().parse().map_err(|_| HarnessError::Usage(format!("bad phase in `{e}`")))?;
            let g = g.trim().parse().map_err(|_| HarnessError::Usage(format!("bad green in `{e}`")))?;
            Ok((p, g))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(FixedTimePlan::new(entries))
}

fn report(s: &EvalSummary) {
    let scenario = s.scenario.map_or("config".to_string(), |x| x.number().to_string());
    println!(
        "{} scenario={} seeds={} episodes={} mean_omega_T={:.3} mean_reward={:.4}",
        s.policy, scenario, s.seeds, s.episodes, s.mean_omega, s.mean_reward
    );
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train(common) => {
            let config = load(&common)?;
            let every = common.progress;
            let out = run_training(&config, |r| {
                if every > 0 && (r.episode + 1) % every == 0 {
                    eprintln!("episode {:>6}  omega_T {:>6}  reward {:>8.3}", r.episode + 1, r.omega_t, r.reward);
                }
            })?;
            println!("metrics: {}", out.metrics.display());
            println!("checkpoint: {}", out.final_checkpoint.display());
        }
        Command::Eval { common, checkpoint, scenario: n } => {
            let config = load(&common)?;
            report(&run_eval(&config, &checkpoint, scenario(n))?);
        }
        Command::Ablate { common, auc_episodes } => {
            let config = load(&common)?;
            let mut names = Vec::new();
            for t in &common.toggles {
                let (name, on) = parse_toggle(t)?;
                if !on {
                    names.push(name);
                }
            }
            if names.is_empty() {
                names = Toggles::NAMES.iter().map(|s| s.to_string()).collect();
            }
            let mut base = config;
            base.agent.toggles = Toggles::all(true);
            let every = common.progress;
            let aucs = run_ablation(&base, &names, auc_episodes, |variant, seed, r| {
                if every > 0 && (r.episode + 1) % every == 0 {
                    eprintln!("{variant} seed {seed} episode {:>6}  omega_T {:>6}", r.episode + 1, r.omega_t);
                }
            })?;
            for (variant, values) in aucs {
                let text: Vec<String> = values.iter().map(|v| format!("{v:.1}")).collect();
                println!("{variant:<20} auc {}", text.join(" "));
            }
        }
        Command::Baseline { common, kind, scenario: n, plan, sweep_tail } => {
            let config = load(&common)?;
            if let Some(tail) = sweep_tail {
                for (plan, m) in run_ft_sweep(&config, config.run.episodes, tail)? {
                    println!("{:?} mean_omega_T={m:.3}", plan.entries);
                }
                return Ok(());
            }
            let kind = match kind {
                Kind::Ft => BaselineKind::FixedTime(plan.as_deref().map(parse_plan).transpose()?),
                Kind::Sotl => BaselineKind::Sotl,
                Kind::Random => BaselineKind::Random,
            };
            report(&run_baseline(&config, &kind, scenario(n))?.0);
        }
        Command::Plot { inputs, out, svg } => {
            for p in emit_plot_data(&inputs, &out, svg)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
