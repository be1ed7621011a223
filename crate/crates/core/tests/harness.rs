//! End-to-end behaviour of the run harness: output files, reproducibility,
//! checkpoints, evaluation and the plotting pipeline.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signal_dqn::agent::Learner;
use signal_dqn::harness::metrics::METRICS_HEADER;
use signal_dqn::harness::{
    emit_plot_data, read_metrics, run_ablation, run_baseline, run_eval, run_training, scenario_flow, smooth,
    BaselineKind, HarnessError, RunConfig, Scenario,
};
use signal_dqn::sim::{LaneFlow, TrafficPreset};

fn tiny(out: &Path) -> RunConfig {
    let mut c = RunConfig::from_toml(
        r#"
        [environment]
        archetype = "case1"
        episode_length = 40

        [agent]
        batch_size = 8
        learn_start = 16
        target_sync = 50

        [network]
        fc_units = 16
        fc_layers = 1
        stream_units = 8
        stream_layers = 1

        [replay]
        capacity = 256

        [run]
        episodes = 4
        checkpoint_interval = 2
        eval_seeds = 2
        eval_episodes = 2
        "#,
    )
    .unwrap();
    c.run.out_dir = out.to_path_buf();
    c
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn no_arrivals_means_no_wait() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny(dir.path());
    c.environment.lanes = Some(vec![LaneFlow::fixed(0.0); 4]);
    let out = run_training(&c, |_| {}).unwrap();
    assert!(out.records.iter().all(|r| r.omega_t == 0 && r.departures == 0));
    let (summary, rows) = run_baseline(&c, &BaselineKind::Random, None).unwrap();
    assert_eq!(summary.mean_omega, 0.0);
    assert!(rows.iter().all(|r| r.omega_t == 0));
}

#[test]
fn training_writes_expected_layout() {
    let dir = tempfile::tempdir().unwrap();
    let c = tiny(dir.path());
    let mut seen = 0;
    let out = run_training(&c, |_| seen += 1).unwrap();
    assert_eq!(seen, 4);
    assert_eq!(header(&out.metrics), METRICS_HEADER.join(","));
    assert_eq!(read_metrics(&out.metrics).unwrap(), out.records);
    for f in ["config.toml", "smoothed.csv", "checkpoints/episode_000002/network.bin", "checkpoints/final/learner.bin"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let saved = RunConfig::load(&dir.path().join("config.toml")).unwrap();
    assert_eq!(saved, c);
    for (i, r) in out.records.iter().enumerate() {
        assert_eq!(r.episode, i);
        assert!(r.actions_taken >= 1 && r.phase_changes <= r.actions_taken);
        assert_eq!(r.wallclock_ms, 0);
    }
}

#[test]
fn same_seed_gives_identical_metrics() {
    let (a, b, other) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run_training(&tiny(a.path()), |_| {}).unwrap().metrics;
    let mb = run_training(&tiny(b.path()), |_| {}).unwrap().metrics;
    assert_eq!(fs::read(&ma).unwrap(), fs::read(&mb).unwrap());
    let mut c = tiny(other.path());
    c.run.seed = 1;
    let mo = run_training(&c, |_| {}).unwrap().metrics;
    assert_ne!(fs::read(&ma).unwrap(), fs::read(&mo).unwrap());
}

#[test]
fn frame_log_agrees_with_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny(dir.path());
    c.run.frame_log = true;
    c.run.episodes = 2;
    let out = run_training(&c, |_| {}).unwrap();
    let text = fs::read_to_string(dir.path().join("frames.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "frame,phase,stage,group0,group1,departures,omega");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // Each episode restarts the frame counter; its last row carries the episode wait.
    let mut ends = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 7);
        assert!(["green", "yellow", "all_red"].contains(&row[2]), "{}", row[2]);
        let next_restarts = rows.get(i + 1).is_none_or(|n| n[0].parse::<u64>().unwrap() <= row[0].parse().unwrap());
        if next_restarts {
            ends.push(row[6].parse::<u64>().unwrap());
        }
    }
    let omegas: Vec<u64> = out.records.iter().map(|r| r.omega_t).collect();
    assert_eq!(ends, omegas);
    let departures: u32 = rows.iter().map(|r| r[5].parse::<u32>().unwrap()).sum();
    assert_eq!(departures, out.records.iter().map(|r| r.departures).sum::<u32>());
}

#[test]
fn checkpoint_restores_greedy_policy() {
    let dir = tempfile::tempdir().unwrap();
    let c = tiny(dir.path());
    let out = run_training(&c, |_| {}).unwrap();
    let spec = c.intersection().unwrap();
    let input = signal_dqn::sim::Observation::flat_len(spec.action_count(), c.timings.green_min);
    let mut a = Learner::load_checkpoint(c.agent_config(), input, spec.action_count(), &out.final_checkpoint).unwrap();
    let b = Learner::load_checkpoint(c.agent_config(), input, spec.action_count(), &out.final_checkpoint).unwrap();
    b.save_checkpoint(&dir.path().join("copy")).unwrap();
    let mut b = Learner::load_checkpoint(c.agent_config(), input, spec.action_count(), &dir.path().join("copy")).unwrap();
    assert_eq!(a.frames(), b.frames());
    assert_eq!(a.online().params(), b.online().params());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let obs: Vec<f64> = (0..input).map(|_| rng.gen_range(0.0..1.0)).collect();
        assert_eq!(a.greedy_action(&obs).unwrap(), b.greedy_action(&obs).unwrap());
    }

    let first = run_eval(&c, &out.final_checkpoint, None).unwrap();
    let bytes = fs::read(dir.path().join("eval/metrics.csv")).unwrap();
    let second = run_eval(&c, &out.final_checkpoint, None).unwrap();
    assert_eq!(first, second);
    assert_eq!(bytes, fs::read(dir.path().join("eval/metrics.csv")).unwrap());

    let mut wrong = c.clone();
    wrong.network.fc_units = 32;
    assert!(run_eval(&wrong, &out.final_checkpoint, None).is_err());
}

#[test]
fn evaluation_and_baselines_share_schema() {
    let dir = tempfile::tempdir().unwrap();
    let c = tiny(dir.path());
    let out = run_training(&c, |_| {}).unwrap();
    let s = run_eval(&c, &out.final_checkpoint, Some(Scenario::One)).unwrap();
    assert_eq!((s.seeds, s.episodes, s.per_seed_omega.len()), (2, 2, 2));
    let eval = dir.path().join("eval_scenario1");
    assert_eq!(header(&eval.join("metrics.csv")), METRICS_HEADER.join(","));
    assert_eq!(read_metrics(&eval.join("metrics.csv")).unwrap().len(), 4);
    assert_eq!(header(&eval.join("summary.csv")), "policy,scenario,seeds,episodes,mean_omega_T,mean_reward");

    for kind in [BaselineKind::FixedTime(None), BaselineKind::Sotl, BaselineKind::Random] {
        let (summary, rows) = run_baseline(&c, &kind, Some(Scenario::Two)).unwrap();
        assert_eq!(rows.len(), 4);
        let base = dir.path().join(format!("baseline_{}_scenario2", kind.name()));
        assert_eq!(header(&base.join("metrics.csv")), METRICS_HEADER.join(","));
        assert_eq!(header(&base.join("summary.csv")), header(&eval.join("summary.csv")));
        let m = rows.iter().map(|r| r.omega_t as f64).sum::<f64>() / 4.0;
        assert!((summary.mean_omega - m).abs() < 1e-9);
    }
}

#[test]
fn scenarios_mirror_each_other() {
    let c = RunConfig::default();
    let spec = c.intersection().unwrap();
    let one = scenario_flow(&spec, Scenario::One, 400).unwrap();
    let two = scenario_flow(&spec, Scenario::Two, 400).unwrap();
    let three = scenario_flow(&spec, Scenario::Three, 400).unwrap();
    for lane in 0..spec.lane_count() {
        let ew = spec.lane_approach(lane).is_east_west();
        let (hi, lo) = (TrafficPreset::High.bounds(), TrafficPreset::Low.bounds());
        assert_eq!(one.lanes[lane], if ew { hi } else { lo });
        assert_eq!(two.lanes[lane], if ew { lo } else { hi });
        assert_eq!(three.lanes[lane], TrafficPreset::Normal.bounds());
    }
}

#[test]
fn ablation_writes_every_variant() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny(dir.path());
    c.run.episodes = 2;
    c.run.eval_seeds = 3;
    c.run.checkpoint_interval = 0;
    let names: Vec<String> = ["double", "dueling", "per", "noisy"].iter().map(|s| s.to_string()).collect();
    let aucs = run_ablation(&c, &names, 1000, |_, _, _| {}).unwrap();
    let variants: Vec<&str> = aucs.iter().map(|(v, _)| v.as_str()).collect();
    assert_eq!(variants, ["full", "no-double", "no-dueling", "no-per", "no-noisy", "vanilla"]);
    let root = dir.path().join("ablation");
    let mut metrics = 0;
    for (variant, auc) in &aucs {
        assert_eq!(auc.len(), 3);
        for seed in 0..3 {
            let path = root.join(variant).join(format!("seed{seed}/metrics.csv"));
            let raw: Vec<f64> = read_metrics(&path).unwrap().iter().map(|r| r.omega_t as f64).collect();
            assert!((smooth(&raw).iter().sum::<f64>() - auc[seed]).abs() < 1e-9);
            metrics += 1;
        }
    }
    assert_eq!(metrics, 18);
    let summary = fs::read_to_string(root.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), "episode,full,no-double,no-dueling,no-per,no-noisy,vanilla");
    assert_eq!(summary.lines().count(), 3);
    assert!(root.join("auc.csv").exists());

    assert!(matches!(run_ablation(&c, &["bogus".into()], 10, |_, _, _| {}), Err(HarnessError::Config(_))));
}

#[test]
fn plot_series_follow_the_smoothing_recurrence() {
    let dir = tempfile::tempdir().unwrap();
    let c = tiny(&dir.path().join("run"));
    let out = run_training(&c, |_| {}).unwrap();
    let written = emit_plot_data(std::slice::from_ref(&out.metrics), &dir.path().join("plots"), true).unwrap();
    assert_eq!(written.len(), 1);
    let text = fs::read_to_string(&written[0]).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "episode,raw,smoothed");
    let mut raw = Vec::new();
    for (line, r) in lines.zip(&out.records) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[1], r.omega_t as f64);
        raw.push(f[1]);
        // Weighted mean of the raw values so far with weights 0.99^(age).
        let weights: Vec<f64> = (0..raw.len()).map(|i| 0.99f64.powi((raw.len() - 1 - i) as i32)).collect();
        let expect = raw.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() / weights.iter().sum::<f64>();
        assert!((f[2] - expect).abs() < 1e-9 * expect.max(1.0));
    }
    assert!(written[0].with_extension("svg").exists());

    let bad = dir.path().join("bad.csv");
    let good = fs::read_to_string(&out.metrics).unwrap();
    let mut rows: Vec<&str> = good.lines().collect();
    rows[3] = "2,oops,0,1,0,0,0,0,0";
    fs::write(&bad, rows.join("\n")).unwrap();
    match emit_plot_data(&[bad], &dir.path().join("plots2"), false) {
        Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
}

#[test]
fn shipped_configs_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 1);
}

#[test]
fn config_errors_name_the_field() {
    let e = RunConfig::from_toml("[agent]\nlearnig_rate = 0.1\n").unwrap_err().to_string();
    assert!(e.contains("learnig_rate"), "{e}");
    let e = RunConfig::from_toml("[agent]\ngamma = 1.5\n").unwrap_err().to_string();
    assert!(e.contains("[agent]") && e.contains("gamma"), "{e}");
}
