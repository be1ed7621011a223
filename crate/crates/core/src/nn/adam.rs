use serde::{Deserialize, Serialize};

use super::NetError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 2e-4, beta1: 0.9, beta2: 0.999, epsilon: 1.5e-4 }
    }
}

/// Bias-corrected first/second moment estimates, one slot per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub step: u64,
}

impl OptimizerState {
    pub fn new(config: AdamConfig, param_count: usize) -> Self {
        OptimizerState { config, first: vec![0.0; param_count], second: vec![0.0; param_count], step: 0 }
    }

    pub fn apply(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), NetError> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(NetError::GradientLength { expected: self.first.len(), got: grads.len().min(params.len()) });
        }
        self.step += 1;
        let AdamConfig { learning_rate, beta1, beta2, epsilon } = self.config;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.first[i] = beta1 * self.first[i] + (1.0 - beta1) * g;
            self.second[i] = beta2 * self.second[i] + (1.0 - beta2) * g * g;
            let m_hat = self.first[i] / c1;
            let v_hat = self.second[i] / c2;
            params[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }
}
