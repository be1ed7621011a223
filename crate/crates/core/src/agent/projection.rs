use crate::nn::Support;

use super::AgentError;

/// Tolerance on the input distribution's total mass.
const MASS_TOLERANCE: f64 = 1e-6;
const SNAP: f64 = 1e-12;

/// Distributes `probs`, shifted to `r + gamma * z` (or to `r` alone on a
/// terminal transition) and clipped to the support, back onto the atoms by
/// linear interpolation between the two neighbouring atoms.
pub fn categorical_project(
    reward: f64,
    gamma: f64,
    terminal: bool,
    probs: &[f64],
    support: &Support,
) -> Result<Vec<f64>, AgentError> {
    let n = support.len();
    if probs.len() != n {
        return Err(AgentError::MalformedDistribution(format!("{} probabilities for {n} atoms", probs.len())));
    }
    if probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(AgentError::MalformedDistribution("negative or NaN probability".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(AgentError::MalformedDistribution(format!("probabilities sum to {total}")));
    }

    let (v_min, v_max) = (support.v_min(), support.v_max());
    let last = (n - 1) as f64;
    let span = v_max - v_min;
    let mut out = vec![0.0; n];
    for (z, &p) in support.atoms().iter().zip(probs) {
        let shifted = if terminal { reward } else { reward + gamma * z };
        let tz = shifted.clamp(v_min, v_max);
        let mut c = ((tz - v_min) * last / span).clamp(0.0, last);
        // Rounding noise must not split mass that lands on an atom.
        if (c - c.round()).abs() < SNAP {
            c = c.round();
        }
        let lower = c.floor();
        let upper = c.ceil();
        if lower == upper {
            out[lower as usize] += p;
        } else {
            out[lower as usize] += p * (upper - c);
            out[upper as usize] += p * (c - lower);
        }
    }
    Ok(out)
}
