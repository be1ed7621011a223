//! Independent reference implementations used as test oracles. They read
//! the flat parameter vector through the public layer descriptors and use
//! plain loops only.
#![allow(dead_code)]

use signal_dqn::nn::{QNetwork, Support};

fn affine(net: &QNetwork, li: usize, x: &[f64]) -> Vec<f64> {
    let d = net.layers()[li];
    let p = net.params();
    let noise = net.noise().0[li].clone();
    let mut y = vec![0.0; d.fan_out];
    for (o, out) in y.iter_mut().enumerate() {
        let mut b = p[d.bias + o];
        if let Some(n) = &noise {
            b += p[d.bias_sigma + o] * n.output[o];
        }
        let mut acc = b;
        for (i, xi) in x.iter().enumerate() {
            let mut w = p[d.weight + o * d.fan_in + i];
            if let Some(n) = &noise {
                w += p[d.weight_sigma + o * d.fan_in + i] * n.output[o] * n.input[i];
            }
            acc += w * xi;
        }
        *out = if d.relu { acc.max(0.0) } else { acc };
    }
    y
}

fn stack(net: &QNetwork, layers: std::ops::Range<usize>, mut x: Vec<f64>) -> Vec<f64> {
    for li in layers {
        x = affine(net, li, &x);
    }
    x
}

/// Per action: log-probabilities over atoms (distributional) or `[Q]`.
pub fn forward(net: &QNetwork, input: &[f64]) -> Vec<Vec<f64>> {
    let s = net.shape();
    let k = s.head_width();
    let h = stack(net, net.trunk_layers(), input.to_vec());
    let adv = stack(net, net.advantage_layers(), h.clone());
    let value = net.value_layers().map(|r| stack(net, r, h));
    let mut out = vec![vec![0.0; k]; s.actions];
    for j in 0..k {
        let mean: f64 = (0..s.actions).map(|a| adv[a * k + j]).sum::<f64>() / s.actions as f64;
        for a in 0..s.actions {
            out[a][j] = match &value {
                Some(v) => v[j] + adv[a * k + j] - mean,
                None => adv[a * k + j],
            };
        }
    }
    if s.distributional {
        for row in &mut out {
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = row.iter().map(|x| (x - m).exp()).sum();
            for x in row.iter_mut() {
                *x = *x - m - z.ln();
            }
        }
    }
    out
}

pub fn q_values(net: &QNetwork, input: &[f64], support: Option<&Support>) -> Vec<f64> {
    forward(net, input)
        .into_iter()
        .map(|row| match support {
            Some(s) => row.iter().zip(s.atoms()).map(|(lp, z)| lp.exp() * z).sum(),
            None => row[0],
        })
        .collect()
}

/// Projection by the triangular-kernel definition: atom j receives
/// `p_k * max(0, 1 - |Tz_k - z_j| / dz)` from every source atom k.
pub fn hat_projection(r: f64, gamma: f64, terminal: bool, probs: &[f64], support: &Support) -> Vec<f64> {
    let dz = support.delta();
    let atoms = support.atoms();
    let mut m = vec![0.0; atoms.len()];
    for (zk, pk) in atoms.iter().zip(probs) {
        let tz = (r + if terminal { 0.0 } else { gamma * zk }).clamp(support.v_min(), support.v_max());
        for (j, zj) in atoms.iter().enumerate() {
            let w = 1.0 - (tz - zj).abs() / dz;
            if w > 0.0 {
                m[j] += pk * w;
            }
        }
    }
    m
}
