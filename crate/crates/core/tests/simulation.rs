//! Statistical properties of vehicle generation over many episodes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use signal_dqn::sim::{FlowModel, IntersectionSpec, LaneFlow, SignalTimings, TrafficEnv};

const EPISODES: usize = 1000;
const T: u64 = 200;

fn run(p: f64) -> Vec<f64> {
    let spec = IntersectionSpec::case1();
    let lanes = spec.lane_count();
    let flow = FlowModel::uniform(lanes, LaneFlow::fixed(p), T).unwrap();
    let mut env = TrafficEnv::new(spec, SignalTimings::default(), flow).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut totals = Vec::with_capacity(EPISODES);
    for e in 0..EPISODES {
        env.reset_with(vec![p; lanes]).unwrap();
        while !env.is_done() {
            env.apply_action(e % 2, &mut rng).unwrap();
        }
        let s = env.spawn_stats();
        assert_eq!(s.attempts, s.spawned + s.suppressed);
        assert_eq!(s.spawned, s.departed + env.state().in_system() as u64);
        totals.push(s.attempts as f64);
    }
    totals
}

#[test]
fn arrivals_are_binomial_per_episode() {
    for p in [0.03, 0.07, 0.12] {
        let totals = run(p);
        let n = (T * IntersectionSpec::case1().lane_count() as u64) as f64;
        let (mu, var) = (n * p, n * p * (1.0 - p));
        let mean = totals.iter().sum::<f64>() / EPISODES as f64;
        let sample_var = totals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (EPISODES - 1) as f64;
        let se = (var / EPISODES as f64).sqrt();
        assert!((mean - mu).abs() <= 3.0 * se, "p={p}: mean {mean} vs {mu} (se {se})");
        // Sample variance of n draws has standard error ~ var * sqrt(2/(n-1)).
        let var_se = var * (2.0 / (EPISODES - 1) as f64).sqrt();
        assert!((sample_var - var).abs() <= 3.0 * var_se, "p={p}: var {sample_var} vs {var}");
    }
}

#[test]
fn episode_probabilities_stay_in_bounds() {
    let flow = FlowModel::uniform(8, LaneFlow::new(0.03, 0.07), T).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sum = 0.0;
    for _ in 0..EPISODES {
        for p in flow.sample_episode(&mut rng).unwrap() {
            assert!((0.03..=0.07).contains(&p));
            sum += p;
        }
    }
    let mean = sum / (8 * EPISODES) as f64;
    let se = (0.04f64.powi(2) / 12.0 / (8 * EPISODES) as f64).sqrt();
    assert!((mean - 0.05).abs() <= 3.0 * se, "{mean}");
}
