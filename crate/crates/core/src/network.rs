//! Dense feedforward classifier with backpropagation parameterized by any
//! loss in the catalogue, plus a central-difference gradient oracle.
//!
//! The output head keeps the softmax Jacobian in full rather than the fused
//! softmax-cross-entropy shortcut; the shortcut is only valid for
//! cross-entropy and every catalogue loss must chain correctly.

use crate::losses::{multiclass_grad, multiclass_loss, LossError, LossSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("bad network shape: {0}")]
    BadShape(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Loss(#[from] LossError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    ReLU,
    Sigmoid,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::ReLU => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
        }
    }

    fn deriv(self, z: f64) -> f64 {
        match self {
            Activation::ReLU => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
        }
    }

    pub fn parse(name: &str) -> Option<Activation> {
        match name.to_ascii_lowercase().as_str() {
            "relu" => Some(Activation::ReLU),
            "sigmoid" => Some(Activation::Sigmoid),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputHead {
    /// Single unit emitting P(y=1|x); final layer size must be 1.
    Sigmoid,
    /// C units normalized to the simplex; final layer size must be >= 2.
    Softmax,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_head: OutputHead,
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-layer parameter gradients, shape-matched to a `Network`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBundle {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl GradientBundle {
    pub fn zeros_like(net: &Network) -> GradientBundle {
        GradientBundle {
            weights: net
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows, w.cols))
                .collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn shape_matches(&self, net: &Network) -> bool {
        self.weights.len() == net.weights.len()
            && self.biases.len() == net.biases.len()
            && self
                .weights
                .iter()
                .zip(&net.weights)
                .all(|(g, w)| g.rows == w.rows && g.cols == w.cols)
            && self
                .biases
                .iter()
                .zip(&net.biases)
                .all(|(g, b)| g.len() == b.len())
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for v in &mut w.data {
                *v *= factor;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= factor;
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let mut sum = 0.0;
        for w in &self.weights {
            sum += w.data.iter().map(|v| v * v).sum::<f64>();
        }
        for b in &self.biases {
            sum += b.iter().map(|v| v * v).sum::<f64>();
        }
        sum.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.data.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// Maximum relative per-parameter deviation from `other`, normalized by
    /// max(1, |value|).
    pub fn max_rel_diff(&self, other: &GradientBundle) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.weights.iter().zip(&other.weights) {
            for (x, y) in a.data.iter().zip(&b.data) {
                worst = worst.max((x - y).abs() / x.abs().max(1.0));
            }
        }
        for (a, b) in self.biases.iter().zip(&other.biases) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs() / x.abs().max(1.0));
            }
        }
        worst
    }
}

struct ForwardTrace {
    /// Activations per layer; index 0 is the input, last is the head output.
    activations: Vec<Vec<f64>>,
    /// Pre-activations per non-input layer.
    pre_activations: Vec<Vec<f64>>,
}

impl Network {
    /// Scaled-uniform init: weights uniform in ±sqrt(6/(fan_in+fan_out)),
    /// biases zero, deterministic per seed.
    pub fn init(
        layer_sizes: &[usize],
        hidden_activation: Activation,
        output_head: OutputHead,
        seed: u64,
    ) -> Result<Network, NetworkError> {
        if layer_sizes.len() < 2 {
            return Err(NetworkError::BadShape(format!(
                "need at least 2 layers, got {}",
                layer_sizes.len()
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(NetworkError::BadShape("zero-sized layer".into()));
        }
        let out = *layer_sizes.last().unwrap();
        match output_head {
            OutputHead::Sigmoid if out != 1 => {
                return Err(NetworkError::BadShape(format!(
                    "sigmoid head requires final layer size 1, got {out}"
                )))
            }
            OutputHead::Softmax if out < 2 => {
                return Err(NetworkError::BadShape(format!(
                    "softmax head requires final layer size >= 2, got {out}"
                )))
            }
            _ => {}
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut w = Matrix::zeros(fan_out, fan_in);
            for v in &mut w.data {
                *v = rng.gen_range(-bound..bound);
            }
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Network {
            layer_sizes: layer_sizes.to_vec(),
            hidden_activation,
            output_head,
            weights,
            biases,
        })
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Number of classes the network distinguishes.
    pub fn class_count(&self) -> usize {
        match self.output_head {
            OutputHead::Sigmoid => 2,
            OutputHead::Softmax => self.output_size(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.data.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace, NetworkError> {
        if x.len() != self.input_size() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.input_size(),
                got: x.len(),
            });
        }
        let layers = self.weights.len();
        let mut activations = Vec::with_capacity(layers + 1);
        let mut pre_activations = Vec::with_capacity(layers);
        activations.push(x.to_vec());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let prev = activations.last().unwrap();
            let mut z = b.clone();
            for r in 0..w.rows {
                let mut acc = 0.0;
                for c in 0..w.cols {
                    acc += w.get(r, c) * prev[c];
                }
                z[r] += acc;
            }
            let a = if l + 1 == layers {
                match self.output_head {
                    OutputHead::Sigmoid => vec![sigmoid(z[0])],
                    OutputHead::Softmax => softmax(&z),
                }
            } else {
                z.iter().map(|&v| self.hidden_activation.apply(v)).collect()
            };
            pre_activations.push(z);
            activations.push(a);
        }
        Ok(ForwardTrace {
            activations,
            pre_activations,
        })
    }

    /// Head output: a 1-vector P(y=1|x) for the sigmoid head, a simplex
    /// vector for softmax.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NetworkError> {
        let mut trace = self.forward_trace(x)?;
        Ok(trace.activations.pop().unwrap())
    }

    /// Predicted class index; argmax with ties broken toward the lower index
    /// (sigmoid head: class 1 iff output > 0.5).
    pub fn predict_class(&self, x: &[f64]) -> Result<usize, NetworkError> {
        let out = self.forward(x)?;
        Ok(match self.output_head {
            OutputHead::Sigmoid => usize::from(out[0] > 0.5),
            OutputHead::Softmax => argmax(&out),
        })
    }

    /// Mean loss over the batch for the given loss spec.
    pub fn batch_loss(
        &self,
        batch: &[(Vec<f64>, Vec<f64>)],
        spec: &LossSpec,
    ) -> Result<f64, NetworkError> {
        if batch.is_empty() {
            return Err(NetworkError::EmptyBatch);
        }
        let mut total = 0.0;
        for (x, t) in batch {
            let out = self.forward(x)?;
            total += self.sample_loss(&out, t, spec)?;
        }
        Ok(total / batch.len() as f64)
    }

    fn sample_loss(
        &self,
        out: &[f64],
        target: &[f64],
        spec: &LossSpec,
    ) -> Result<f64, NetworkError> {
        match self.output_head {
            OutputHead::Softmax => Ok(multiclass_loss(spec, target, out)?),
            OutputHead::Sigmoid => {
                let y = scalar_target(target)?;
                Ok(spec.eval(y, out[0])?)
            }
        }
    }

    /// Mean batch loss and its exact gradient with respect to every
    /// parameter.
    pub fn backward(
        &self,
        batch: &[(Vec<f64>, Vec<f64>)],
        spec: &LossSpec,
    ) -> Result<(f64, GradientBundle), NetworkError> {
        if batch.is_empty() {
            return Err(NetworkError::EmptyBatch);
        }
        let mut grads = GradientBundle::zeros_like(self);
        let mut total_loss = 0.0;
        for (x, target) in batch {
            let trace = self.forward_trace(x)?;
            let out = trace.activations.last().unwrap();
            total_loss += self.sample_loss(out, target, spec)?;

            // dl/dz at the output layer, chained through the clamp and the
            // head Jacobian
            let mut delta = match self.output_head {
                OutputHead::Softmax => {
                    let mut g = multiclass_grad(spec, target, out)?;
                    clamp_gate(&mut g, out, spec);
                    let dot: f64 = g.iter().zip(out).map(|(gj, pj)| gj * pj).sum();
                    out.iter().zip(&g).map(|(pk, gk)| pk * (gk - dot)).collect::<Vec<f64>>()
                }
                OutputHead::Sigmoid => {
                    let y = scalar_target(target)?;
                    let mut g = vec![spec.grad(y, out[0])?];
                    clamp_gate(&mut g, out, spec);
                    vec![g[0] * out[0] * (1.0 - out[0])]
                }
            };

            for l in (0..self.weights.len()).rev() {
                let prev = &trace.activations[l];
                for r in 0..self.weights[l].rows {
                    for c in 0..self.weights[l].cols {
                        *grads.weights[l].get_mut(r, c) += delta[r] * prev[c];
                    }
                    grads.biases[l][r] += delta[r];
                }
                if l > 0 {
                    let w = &self.weights[l];
                    let z_prev = &trace.pre_activations[l - 1];
                    let mut next = vec![0.0; w.cols];
                    for c in 0..w.cols {
                        let mut acc = 0.0;
                        for r in 0..w.rows {
                            acc += w.get(r, c) * delta[r];
                        }
                        next[c] = acc * self.hidden_activation.deriv(z_prev[c]);
                    }
                    delta = next;
                }
            }
        }
        let n = batch.len() as f64;
        grads.scale(1.0 / n);
        Ok((total_loss / n, grads))
    }

    /// Central-difference gradient of the mean batch loss; the verification
    /// oracle for `backward`.
    pub fn finite_diff_grad(
        &self,
        batch: &[(Vec<f64>, Vec<f64>)],
        spec: &LossSpec,
        h: f64,
    ) -> Result<GradientBundle, NetworkError> {
        if !(1e-8..=1e-3).contains(&h) {
            return Err(NetworkError::BadShape(format!(
                "finite-difference step must lie in [1e-8, 1e-3], got {h}"
            )));
        }
        if batch.is_empty() {
            return Err(NetworkError::EmptyBatch);
        }
        let mut probe = self.clone();
        let mut grads = GradientBundle::zeros_like(self);
        for l in 0..self.weights.len() {
            for i in 0..self.weights[l].data.len() {
                let original = probe.weights[l].data[i];
                probe.weights[l].data[i] = original + h;
                let plus = probe.batch_loss(batch, spec)?;
                probe.weights[l].data[i] = original - h;
                let minus = probe.batch_loss(batch, spec)?;
                probe.weights[l].data[i] = original;
                grads.weights[l].data[i] = (plus - minus) / (2.0 * h);
            }
            for i in 0..self.biases[l].len() {
                let original = probe.biases[l][i];
                probe.biases[l][i] = original + h;
                let plus = probe.batch_loss(batch, spec)?;
                probe.biases[l][i] = original - h;
                let minus = probe.batch_loss(batch, spec)?;
                probe.biases[l][i] = original;
                grads.biases[l][i] = (plus - minus) / (2.0 * h);
            }
        }
        Ok(grads)
    }
}

/// Zeroes loss-gradient components wherever the clamp is active; the clamp
/// is flat there, so the chained derivative is zero.
fn clamp_gate(grad: &mut [f64], raw: &[f64], spec: &LossSpec) {
    for (g, &p) in grad.iter_mut().zip(raw) {
        if p < spec.eps_clamp || p > 1.0 - spec.eps_clamp {
            *g = 0.0;
        }
    }
}

fn scalar_target(target: &[f64]) -> Result<f64, NetworkError> {
    match target.len() {
        1 => Ok(target[0]),
        // two-class one-hot: the positive-class component is the target
        2 if target[0] + target[1] == 1.0 => Ok(target[1]),
        n => Err(NetworkError::DimensionMismatch { expected: 1, got: n }),
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
