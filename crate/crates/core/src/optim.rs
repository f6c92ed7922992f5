//! Mini-batch SGD and Adam parameter updates.

use crate::network::{GradientBundle, Network};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("gradient shape does not match network")]
    ShapeMismatch,
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("invalid optimizer settings: {0}")]
    InvalidSettings(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    first_moment: Option<GradientBundle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    second_moment: Option<GradientBundle>,
}

impl OptimizerState {
    pub fn sgd(learning_rate: f64) -> Result<OptimizerState, OptimError> {
        OptimizerState::new(OptimizerKind::Sgd, learning_rate, 0.9, 0.999, 1e-8)
    }

    /// Adam with the canonical (0.9, 0.999, 1e-8) defaults.
    pub fn adam(learning_rate: f64) -> Result<OptimizerState, OptimError> {
        OptimizerState::new(OptimizerKind::Adam, learning_rate, 0.9, 0.999, 1e-8)
    }

    pub fn new(
        kind: OptimizerKind,
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    ) -> Result<OptimizerState, OptimError> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(OptimError::InvalidSettings(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        for (name, v) in [("beta1", beta1), ("beta2", beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(OptimError::InvalidSettings(format!(
                    "{name} must lie in [0, 1), got {v}"
                )));
            }
        }
        if !(epsilon > 0.0) {
            return Err(OptimError::InvalidSettings(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(OptimizerState {
            kind,
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step_count: 0,
            first_moment: None,
            second_moment: None,
        })
    }

    /// One parameter update in place; increments `step_count` by exactly 1.
    pub fn step(&mut self, net: &mut Network, grads: &GradientBundle) -> Result<(), OptimError> {
        if !grads.shape_matches(net) {
            return Err(OptimError::ShapeMismatch);
        }
        if !grads.is_finite() {
            return Err(OptimError::NonFiniteGradient);
        }
        self.step_count += 1;
        match self.kind {
            OptimizerKind::Sgd => self.sgd_step(net, grads),
            OptimizerKind::Adam => self.adam_step(net, grads),
        }
        Ok(())
    }

    fn sgd_step(&self, net: &mut Network, grads: &GradientBundle) {
        let lr = self.learning_rate;
        for (w, gw) in net.weights.iter_mut().zip(&grads.weights) {
            for (theta, g) in w.data.iter_mut().zip(&gw.data) {
                *theta -= lr * g;
            }
        }
        for (b, gb) in net.biases.iter_mut().zip(&grads.biases) {
            for (theta, g) in b.iter_mut().zip(gb) {
                *theta -= lr * g;
            }
        }
    }

    fn adam_step(&mut self, net: &mut Network, grads: &GradientBundle) {
        if self.first_moment.is_none() {
            self.first_moment = Some(GradientBundle::zeros_like(net));
            self.second_moment = Some(GradientBundle::zeros_like(net));
        }
        let (b1, b2) = (self.beta1, self.beta2);
        let t = self.step_count as i32;
        let bias1 = 1.0 - b1.powi(t);
        let bias2 = 1.0 - b2.powi(t);
        let (lr, eps) = (self.learning_rate, self.epsilon);
        let m = self.first_moment.as_mut().unwrap();
        let v = self.second_moment.as_mut().unwrap();

        let update = |theta: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *theta -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        for l in 0..net.weights.len() {
            for i in 0..net.weights[l].data.len() {
                update(
                    &mut net.weights[l].data[i],
                    &mut m.weights[l].data[i],
                    &mut v.weights[l].data[i],
                    grads.weights[l].data[i],
                );
            }
            for i in 0..net.biases[l].len() {
                update(
                    &mut net.biases[l][i],
                    &mut m.biases[l][i],
                    &mut v.biases[l][i],
                    grads.biases[l][i],
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Activation, Matrix, Network, OutputHead};

    /// Single-parameter [1,1] sigmoid network; the lone weight is the knob.
    fn scalar_net(theta: f64) -> Network {
        let mut net =
            Network::init(&[1, 1], Activation::Tanh, OutputHead::Sigmoid, 0).unwrap();
        net.weights[0] = Matrix {
            rows: 1,
            cols: 1,
            data: vec![theta],
        };
        net
    }

    fn grad_of(net: &Network, g: f64) -> GradientBundle {
        let mut bundle = GradientBundle::zeros_like(net);
        for w in &mut bundle.weights {
            w.data.fill(g);
        }
        for b in &mut bundle.biases {
            b.fill(g);
        }
        bundle
    }

    #[test]
    fn sgd_update_rule() {
        let mut net = scalar_net(1.0);
        let grads = grad_of(&net, 0.5);
        let mut opt = OptimizerState::sgd(0.1).unwrap();
        opt.step(&mut net, &grads).unwrap();
        assert_eq!(net.weights[0].data[0], 0.95);
        assert_eq!(opt.step_count, 1);
    }

    #[test]
    fn adam_first_step_closed_form() {
        let mut net = scalar_net(1.0);
        let grads = grad_of(&net, 0.5);
        let mut opt = OptimizerState::adam(1e-3).unwrap();
        opt.step(&mut net, &grads).unwrap();
        // step 1: m_hat = g, v_hat = g^2, update = -lr * g/(|g| + eps)
        let expected = 1.0 - 1e-3 * 0.5 / (0.5 + 1e-8);
        assert!((net.weights[0].data[0] - expected).abs() < 1e-15);
        assert!((net.weights[0].data[0] - (1.0 - 9.99999e-4)).abs() < 1e-9);
    }

    #[test]
    fn zero_gradient_leaves_parameters_in_place() {
        let mut net = scalar_net(1.0);
        let grads = grad_of(&net, 0.0);
        let mut sgd = OptimizerState::sgd(0.1).unwrap();
        sgd.step(&mut net, &grads).unwrap();
        assert_eq!(net.weights[0].data[0], 1.0);

        let mut adam = OptimizerState::adam(1e-3).unwrap();
        adam.step(&mut net, &grads).unwrap();
        assert!((net.weights[0].data[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn step_is_deterministic() {
        let run = || {
            let mut net = scalar_net(0.3);
            let mut opt = OptimizerState::adam(1e-2).unwrap();
            for i in 0..50 {
                let grads = grad_of(&net, (i as f64 * 0.37).sin());
                opt.step(&mut net, &grads).unwrap();
            }
            (net, opt)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_shape_mismatch_and_nonfinite() {
        let mut net = scalar_net(1.0);
        let other = Network::init(&[2, 2], Activation::Tanh, OutputHead::Softmax, 0).unwrap();
        let wrong = GradientBundle::zeros_like(&other);
        let mut opt = OptimizerState::sgd(0.1).unwrap();
        assert!(matches!(
            opt.step(&mut net, &wrong),
            Err(OptimError::ShapeMismatch)
        ));
        let nan = grad_of(&net, f64::NAN);
        assert!(matches!(
            opt.step(&mut net, &nan),
            Err(OptimError::NonFiniteGradient)
        ));
    }

    #[test]
    fn adam_finds_quadratic_minimum() {
        // minimize (theta - 3)^2 by feeding its gradient directly
        let mut net = scalar_net(0.0);
        let mut opt = OptimizerState::adam(1e-2).unwrap();
        for _ in 0..10_000 {
            let theta = net.weights[0].data[0];
            let grads = grad_of(&net, 2.0 * (theta - 3.0));
            opt.step(&mut net, &grads).unwrap();
        }
        // bias also follows the same fed gradient; only the weight matters here
        assert!((net.weights[0].data[0] - 3.0).abs() < 1e-3);
    }

    #[test]
    fn sgd_monotonically_decreases_a_quadratic() {
        let mut net = scalar_net(5.0);
        let mut opt = OptimizerState::sgd(0.05).unwrap();
        let f = |theta: f64| (theta - 3.0).powi(2);
        let mut prev = f(net.weights[0].data[0]);
        for _ in 0..100 {
            let theta = net.weights[0].data[0];
            let grads = grad_of(&net, 2.0 * (theta - 3.0));
            opt.step(&mut net, &grads).unwrap();
            let now = f(net.weights[0].data[0]);
            assert!(now <= prev);
            prev = now;
        }
    }

    #[test]
    fn settings_validation() {
        assert!(OptimizerState::sgd(0.0).is_err());
        assert!(OptimizerState::new(OptimizerKind::Adam, 1e-3, 1.0, 0.999, 1e-8).is_err());
        assert!(OptimizerState::new(OptimizerKind::Adam, 1e-3, 0.9, 0.999, 0.0).is_err());
    }
}
