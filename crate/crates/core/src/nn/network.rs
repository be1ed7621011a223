//! Dueling, optionally noisy and distributional Q-network.
//!
//! Topology: `fc_layers` rectified affine layers of `fc_units`, then an
//! advantage stream (and, when dueling, a value stream) of `stream_layers`
//! rectified hidden layers of `stream_units` followed by a linear output
//! layer. Stream layers are factorized-Gaussian noisy layers when `noisy`
//! is set. The head combines `V + A - mean_a(A)` in logit space and, in
//! distributional mode, applies a log-softmax over atoms per action.
//!
//! All parameters live in one flat vector; each layer records the offsets
//! of its weight/bias means and (for noisy layers) noise scales.

use std::ops::Range;

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayView3, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::support::Support;
use super::NetError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub input: usize,
    pub actions: usize,
    pub atoms: usize,
    pub distributional: bool,
    pub fc_units: usize,
    pub fc_layers: usize,
    pub stream_units: usize,
    pub stream_layers: usize,
    pub dueling: bool,
    pub noisy: bool,
    pub sigma0: f64,
}

impl NetworkShape {
    /// Output values per action: the atom count, or 1 for a scalar Q head.
    pub fn head_width(&self) -> usize {
        if self.distributional {
            self.atoms
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |m: String| Err(NetError::InvalidShape(m));
        if self.input == 0 {
            return bad("input width must be positive".into());
        }
        if self.actions < 1 {
            return bad("need at least one action".into());
        }
        if self.distributional && self.atoms < 2 {
            return bad(format!("distributional head needs >= 2 atoms, got {}", self.atoms));
        }
        if self.fc_layers > 0 && self.fc_units == 0 {
            return bad("fc_units must be positive".into());
        }
        if self.stream_layers > 0 && self.stream_units == 0 {
            return bad("stream_units must be positive".into());
        }
        if self.noisy && !(self.sigma0 >= 0.0) {
            return bad(format!("sigma0 must be non-negative, got {}", self.sigma0));
        }
        Ok(())
    }
}

/// One affine layer's location inside the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerDesc {
    pub fan_in: usize,
    pub fan_out: usize,
    pub noisy: bool,
    pub relu: bool,
    pub weight: usize,
    pub bias: usize,
    /// Offsets of the noise scales; meaningful only for noisy layers.
    pub weight_sigma: usize,
    pub bias_sigma: usize,
}

impl LayerDesc {
    pub fn param_count(&self) -> usize {
        let base = self.fan_in * self.fan_out + self.fan_out;
        if self.noisy {
            2 * base
        } else {
            base
        }
    }
}

/// Factorized noise for one layer, already passed through `sign(x) sqrt|x|`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerNoise {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

/// Noise realization for every layer of a network (`None` for plain layers).
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseState(pub Vec<Option<LayerNoise>>);

fn scale_noise(x: f64) -> f64 {
    x.signum() * x.abs().sqrt()
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Layout {
    layers: Vec<LayerDesc>,
    trunk: Range<usize>,
    value: Option<Range<usize>>,
    advantage: Range<usize>,
    params: usize,
}

impl Layout {
    fn build(shape: &NetworkShape) -> Layout {
        let mut layers = Vec::new();
        let mut offset = 0;
        let mut push = |fan_in: usize, fan_out: usize, noisy: bool, relu: bool| {
            let n = fan_in * fan_out;
            let mut desc = LayerDesc {
                fan_in,
                fan_out,
                noisy,
                relu,
                weight: offset,
                bias: offset + n,
                weight_sigma: 0,
                bias_sigma: 0,
            };
            offset += n + fan_out;
            if noisy {
                desc.weight_sigma = offset;
                desc.bias_sigma = offset + n;
                offset += n + fan_out;
            }
            layers.push(desc);
            layers.len() - 1
        };

        let mut width = shape.input;
        for _ in 0..shape.fc_layers {
            push(width, shape.fc_units, false, true);
            width = shape.fc_units;
        }
        let trunk = 0..shape.fc_layers;
        let trunk_width = width;
        let mut stream = |out: usize| {
            let mut w = trunk_width;
            let mut first = None;
            for _ in 0..shape.stream_layers {
                let idx = push(w, shape.stream_units, shape.noisy, true);
                first.get_or_insert(idx);
                w = shape.stream_units;
            }
            let last = push(w, out, shape.noisy, false);
            first.unwrap_or(last)..last + 1
        };
        let head = shape.head_width();
        let value = shape.dueling.then(|| stream(head));
        let advantage = stream(shape.actions * head);
        Layout { layers, trunk, value, advantage, params: offset }
    }
}

/// Everything a backward pass needs from the forward pass.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    /// `(batch, actions, head_width)`: log-probabilities over atoms in
    /// distributional mode, Q-values (width 1) otherwise.
    pub out: Array3<f64>,
    distributional: bool,
    inputs: Vec<Array2<f64>>,
    outputs: Vec<Array2<f64>>,
    weights: Vec<Option<(Array2<f64>, Array1<f64>)>>,
    noise: Vec<Option<LayerNoise>>,
}

impl ForwardPass {
    pub fn batch(&self) -> usize {
        self.out.len_of(Axis(0))
    }

    /// Atom probabilities; only meaningful in distributional mode.
    pub fn probs(&self) -> Array3<f64> {
        self.out.mapv(f64::exp)
    }

    /// `(batch, actions)` expected action values.
    pub fn q_values(&self, support: Option<&Support>) -> Array2<f64> {
        let (b, a, _) = self.out.dim();
        if !self.distributional {
            return self.out.index_axis(Axis(2), 0).to_owned();
        }
        let atoms = support.expect("distributional head needs a support").atoms();
        Array2::from_shape_fn((b, a), |(i, j)| {
            atoms.iter().enumerate().map(|(k, z)| z * self.out[[i, j, k]].exp()).sum()
        })
    }
}

#[derive(Clone, Debug)]
pub struct QNetwork {
    shape: NetworkShape,
    layout: Layout,
    params: Vec<f64>,
    noise: Vec<Option<LayerNoise>>,
}

impl QNetwork {
    /// Uniform `±1/sqrt(fan_in)` means; noisy scales start at `sigma0/sqrt(fan_in)`.
    pub fn new<R: Rng + ?Sized>(shape: NetworkShape, rng: &mut R) -> Result<Self, NetError> {
        let mut net = Self::zeroed(shape)?;
        for desc in net.layout.layers.clone() {
            let bound = 1.0 / (desc.fan_in as f64).sqrt();
            let n = desc.fan_in * desc.fan_out;
            for p in &mut net.params[desc.weight..desc.weight + n + desc.fan_out] {
                *p = rng.gen_range(-bound..bound);
            }
            if desc.noisy {
                let sigma = net.shape.sigma0 * bound;
                net.params[desc.weight_sigma..desc.weight_sigma + n + desc.fan_out].fill(sigma);
            }
        }
        Ok(net)
    }

    /// All parameters zero, zero noise.
    pub fn zeroed(shape: NetworkShape) -> Result<Self, NetError> {
        shape.validate()?;
        let layout = Layout::build(&shape);
        let noise = layout
            .layers
            .iter()
            .map(|d| d.noisy.then(|| LayerNoise { input: vec![0.0; d.fan_in], output: vec![0.0; d.fan_out] }))
            .collect();
        Ok(QNetwork { params: vec![0.0; layout.params], shape, layout, noise })
    }

    pub fn from_params(shape: NetworkShape, params: Vec<f64>) -> Result<Self, NetError> {
        let mut net = Self::zeroed(shape)?;
        if params.len() != net.params.len() {
            return Err(NetError::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        net.params = params;
        Ok(net)
    }

    pub fn shape(&self) -> &NetworkShape {
        &self.shape
    }

    pub fn layers(&self) -> &[LayerDesc] {
        &self.layout.layers
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn trunk_layers(&self) -> Range<usize> {
        self.layout.trunk.clone()
    }

    pub fn value_layers(&self) -> Option<Range<usize>> {
        self.layout.value.clone()
    }

    pub fn advantage_layers(&self) -> Range<usize> {
        self.layout.advantage.clone()
    }

    /// Copies parameters from `other`; shapes must agree.
    pub fn copy_from(&mut self, other: &QNetwork) -> Result<(), NetError> {
        if self.shape != other.shape {
            return Err(NetError::ShapeMismatch("cannot copy between different shapes".into()));
        }
        self.params.copy_from_slice(&other.params);
        Ok(())
    }

    pub fn sample_noise<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for n in self.noise.iter_mut().flatten() {
            for x in n.input.iter_mut().chain(n.output.iter_mut()) {
                let e: f64 = StandardNormal.sample(rng);
                *x = scale_noise(e);
            }
        }
    }

    pub fn zero_noise(&mut self) {
        for n in self.noise.iter_mut().flatten() {
            n.input.fill(0.0);
            n.output.fill(0.0);
        }
    }

    pub fn noise(&self) -> NoiseState {
        NoiseState(self.noise.clone())
    }

    pub fn set_noise(&mut self, noise: &NoiseState) -> Result<(), NetError> {
        let compatible = noise.0.len() == self.noise.len()
            && noise.0.iter().zip(&self.noise).all(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => a.input.len() == b.input.len() && a.output.len() == b.output.len(),
                (None, None) => true,
                _ => false,
            });
        if !compatible {
            return Err(NetError::ShapeMismatch("noise realization does not fit this network".into()));
        }
        self.noise = noise.0.clone();
        Ok(())
    }

    /// Mean absolute weight noise scale over all noisy layers.
    pub fn mean_noise_scale(&self) -> f64 {
        let (sum, count) = self.layout.layers.iter().filter(|d| d.noisy).fold((0.0, 0usize), |(s, c), d| {
            let n = d.fan_in * d.fan_out;
            let sigma = &self.params[d.weight_sigma..d.weight_sigma + n];
            (s + sigma.iter().map(|x| x.abs()).sum::<f64>(), c + n)
        });
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    fn mean_weights(&self, d: &LayerDesc) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let n = d.fan_in * d.fan_out;
        let w = ArrayView2::from_shape((d.fan_out, d.fan_in), &self.params[d.weight..d.weight + n])
            .expect("layer slice matches its shape");
        let b = ArrayView1::from(&self.params[d.bias..d.bias + d.fan_out]);
        (w, b)
    }

    fn effective_weights(&self, li: usize) -> Option<(Array2<f64>, Array1<f64>)> {
        let d = &self.layout.layers[li];
        let noise = self.noise[li].as_ref()?;
        let n = d.fan_in * d.fan_out;
        let (w_mu, b_mu) = self.mean_weights(d);
        let w_sigma = ArrayView2::from_shape((d.fan_out, d.fan_in), &self.params[d.weight_sigma..d.weight_sigma + n])
            .expect("layer slice matches its shape");
        let b_sigma = ArrayView1::from(&self.params[d.bias_sigma..d.bias_sigma + d.fan_out]);
        let mut w = w_mu.to_owned();
        for o in 0..d.fan_out {
            let eo = noise.output[o];
            for i in 0..d.fan_in {
                w[[o, i]] += w_sigma[[o, i]] * eo * noise.input[i];
            }
        }
        let b = &b_mu + &(&b_sigma * &ArrayView1::from(&noise.output));
        Some((w, b))
    }

    fn run_layers(
        &self,
        range: Range<usize>,
        mut x: Array2<f64>,
        pass_inputs: &mut [Option<Array2<f64>>],
        pass_outputs: &mut [Option<Array2<f64>>],
        pass_weights: &mut [Option<(Array2<f64>, Array1<f64>)>],
    ) -> Array2<f64> {
        for li in range {
            let d = self.layout.layers[li];
            let eff = self.effective_weights(li);
            let mut y = match &eff {
                Some((w, b)) => x.dot(&w.t()) + b,
                None => {
                    let (w, b) = self.mean_weights(&d);
                    x.dot(&w.t()) + &b
                }
            };
            if d.relu {
                y.mapv_inplace(|v| v.max(0.0));
            }
            pass_inputs[li] = Some(x);
            pass_outputs[li] = Some(y.clone());
            pass_weights[li] = eff;
            x = y;
        }
        x
    }

    /// Batched forward pass over rows of `input`.
    pub fn forward(&self, input: ArrayView2<'_, f64>) -> Result<ForwardPass, NetError> {
        let (batch, width) = input.dim();
        if width != self.shape.input {
            return Err(NetError::InputWidth { expected: self.shape.input, got: width });
        }
        let n_layers = self.layout.layers.len();
        let mut inputs = vec![None; n_layers];
        let mut outputs = vec![None; n_layers];
        let mut weights = vec![None; n_layers];

        let features = self.run_layers(
            self.layout.trunk.clone(),
            input.to_owned(),
            &mut inputs,
            &mut outputs,
            &mut weights,
        );
        let value = self
            .layout
            .value
            .clone()
            .map(|r| self.run_layers(r, features.clone(), &mut inputs, &mut outputs, &mut weights));
        let adv =
            self.run_layers(self.layout.advantage.clone(), features, &mut inputs, &mut outputs, &mut weights);

        let actions = self.shape.actions;
        let k = self.shape.head_width();
        let mut out = Array3::<f64>::zeros((batch, actions, k));
        for b in 0..batch {
            for j in 0..k {
                let offset = match &value {
                    Some(v) => {
                        let mean = (0..actions).map(|a| adv[[b, a * k + j]]).sum::<f64>() / actions as f64;
                        v[[b, j]] - mean
                    }
                    None => 0.0,
                };
                for a in 0..actions {
                    out[[b, a, j]] = adv[[b, a * k + j]] + offset;
                }
            }
        }
        if self.shape.distributional {
            for b in 0..batch {
                for a in 0..actions {
                    let mut row = out.slice_mut(ndarray::s![b, a, ..]);
                    let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
                    let lse = max + row.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
                    row.mapv_inplace(|x| x - lse);
                }
            }
        }

        Ok(ForwardPass {
            out,
            distributional: self.shape.distributional,
            inputs: inputs.into_iter().map(Option::unwrap_or_default).collect(),
            outputs: outputs.into_iter().map(Option::unwrap_or_default).collect(),
            weights,
            noise: self.noise.clone(),
        })
    }

    fn backprop_layers(
        &self,
        range: Range<usize>,
        mut dy: Array2<f64>,
        pass: &ForwardPass,
        grads: &mut [f64],
    ) -> Array2<f64> {
        for li in range.rev() {
            let d = self.layout.layers[li];
            if d.relu {
                dy.zip_mut_with(&pass.outputs[li], |g, &h| {
                    if h <= 0.0 {
                        *g = 0.0;
                    }
                });
            }
            let x = &pass.inputs[li];
            let dw = dy.t().dot(x);
            let db = dy.sum_axis(Axis(0));
            let n = d.fan_in * d.fan_out;
            for (g, v) in grads[d.weight..d.weight + n].iter_mut().zip(dw.iter()) {
                *g += v;
            }
            for (g, v) in grads[d.bias..d.bias + d.fan_out].iter_mut().zip(db.iter()) {
                *g += v;
            }
            if let Some(noise) = &pass.noise[li] {
                let ws = &mut grads[d.weight_sigma..d.weight_sigma + n];
                for o in 0..d.fan_out {
                    let eo = noise.output[o];
                    for i in 0..d.fan_in {
                        ws[o * d.fan_in + i] += dw[[o, i]] * eo * noise.input[i];
                    }
                }
                for (o, g) in grads[d.bias_sigma..d.bias_sigma + d.fan_out].iter_mut().enumerate() {
                    *g += db[o] * noise.output[o];
                }
            }
            dy = match &pass.weights[li] {
                Some((w, _)) => dy.dot(w),
                None => dy.dot(&self.mean_weights(&d).0),
            };
        }
        dy
    }

    /// Gradient of a scalar loss with respect to every parameter, given the
    /// loss gradient with respect to `pass.out`.
    pub fn backward(&self, pass: &ForwardPass, grad_out: ArrayView3<'_, f64>) -> Result<Vec<f64>, NetError> {
        if pass.inputs.len() != self.layout.layers.len() || pass.distributional != self.shape.distributional {
            return Err(NetError::ShapeMismatch("forward pass was recorded on a different network".into()));
        }
        if grad_out.dim() != pass.out.dim() {
            return Err(NetError::ShapeMismatch(format!(
                "output gradient {:?} does not match forward output {:?}",
                grad_out.dim(),
                pass.out.dim()
            )));
        }
        let (batch, actions, k) = pass.out.dim();
        let mut dlogit = grad_out.to_owned();
        if self.shape.distributional {
            for b in 0..batch {
                for a in 0..actions {
                    let total: f64 = (0..k).map(|j| grad_out[[b, a, j]]).sum();
                    for j in 0..k {
                        dlogit[[b, a, j]] -= pass.out[[b, a, j]].exp() * total;
                    }
                }
            }
        }
        let mut d_adv = Array2::<f64>::zeros((batch, actions * k));
        let mut d_value = self.layout.value.as_ref().map(|_| Array2::<f64>::zeros((batch, k)));
        for b in 0..batch {
            for j in 0..k {
                let col: f64 = (0..actions).map(|a| dlogit[[b, a, j]]).sum();
                let mean = if d_value.is_some() { col / actions as f64 } else { 0.0 };
                if let Some(dv) = d_value.as_mut() {
                    dv[[b, j]] = col;
                }
                for a in 0..actions {
                    d_adv[[b, a * k + j]] = dlogit[[b, a, j]] - mean;
                }
            }
        }

        let mut grads = vec![0.0; self.params.len()];
        let mut d_features = self.backprop_layers(self.layout.advantage.clone(), d_adv, pass, &mut grads);
        if let (Some(range), Some(dv)) = (self.layout.value.clone(), d_value) {
            d_features += &self.backprop_layers(range, dv, pass, &mut grads);
        }
        self.backprop_layers(self.layout.trunk.clone(), d_features, pass, &mut grads);
        Ok(grads)
    }
}
