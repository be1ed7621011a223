use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signal_dqn::replay::{PerConfig, PriorityBuffer, SumTree, Transition};

fn item(tag: f32) -> Transition {
    Transition { state: vec![tag], action: 0, reward: 0.0, next_state: vec![tag], terminal: false }
}

#[test]
fn sampling_frequencies_follow_priorities() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let config = PerConfig { capacity: 64, ..Default::default() };
    let mut buf = PriorityBuffer::new(config, 1).unwrap();
    let mut indices = Vec::new();
    for i in 0..64 {
        indices.push(buf.push(item(i as f32)).unwrap());
    }
    let deltas: Vec<f64> = (0..64).map(|_| rng.gen_range(0.0..5.0)).collect();
    buf.update_priorities(&indices, &deltas);
    let leaves: Vec<f64> = (0..64).map(|s| (deltas[s] + config.epsilon).powf(config.alpha)).collect();
    let total: f64 = leaves.iter().sum();

    let draws = 1_000_000;
    let batch = 32;
    let mut counts = [0usize; 64];
    for _ in 0..draws / batch {
        for idx in buf.sample(batch, &mut rng).unwrap().indices {
            counts[idx.slot] += 1;
        }
    }
    for s in 0..64 {
        let freq = counts[s] as f64 / draws as f64;
        assert!((freq - leaves[s] / total).abs() < 0.01, "slot {s}: {freq} vs {}", leaves[s] / total);
    }
}

#[test]
fn root_tracks_leaf_sum_under_churn() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut buf = PriorityBuffer::new(PerConfig { capacity: 256, ..Default::default() }, 1).unwrap();
    let mut live = Vec::new();
    for step in 0..100_000 {
        if live.is_empty() || rng.gen_bool(0.4) {
            live.push(buf.push(item(step as f32)).unwrap());
        } else {
            let picks: Vec<_> = (0..4).map(|_| live[rng.gen_range(0..live.len())]).collect();
            let deltas: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            buf.update_priorities(&picks, &deltas);
        }
    }
    let leaf_sum: f64 = (0..buf.capacity()).map(|s| buf.leaf(s)).sum();
    let root = buf.total_priority();
    assert!((root - leaf_sum).abs() <= 1e-6 * leaf_sum, "{root} vs {leaf_sum}");
}

proptest! {
    #[test]
    fn sum_tree_root_is_leaf_sum(ops in proptest::collection::vec((0usize..32, 0.0f64..10.0), 1..300)) {
        let mut tree = SumTree::new(32);
        let mut leaves = [0.0f64; 32];
        for (i, v) in ops {
            tree.set(i, v);
            leaves[i] = v;
        }
        let sum: f64 = leaves.iter().sum();
        prop_assert!((tree.total() - sum).abs() <= 1e-9 * sum.max(1.0));
    }

    #[test]
    fn normalized_weights_in_unit_interval(deltas in proptest::collection::vec(0.0f64..10.0, 8), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut buf = PriorityBuffer::new(PerConfig { capacity: 8, ..Default::default() }, 1).unwrap();
        let idx: Vec<_> = (0..8).map(|i| buf.push(item(i as f32)).unwrap()).collect();
        buf.update_priorities(&idx, &deltas);
        let before = buf.beta();
        let s = buf.sample(4, &mut rng).unwrap();
        prop_assert!(s.weights.iter().all(|w| *w > 0.0 && *w <= 1.0));
        prop_assert!(buf.beta() >= before && buf.beta() <= 1.0);
    }
}
