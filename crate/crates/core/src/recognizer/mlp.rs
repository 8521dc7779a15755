//! N -> H -> 1 perceptron with logistic units on both layers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// `0.5 (y - t)^2`.
    #[default]
    Mse,
    /// `-(t ln y + (1 - t) ln(1 - y))`.
    CrossEntropy,
}

impl Loss {
    pub fn value(self, y: f64, t: f64) -> f64 {
        match self {
            Loss::Mse => 0.5 * (y - t) * (y - t),
            Loss::CrossEntropy => {
                let y = y.clamp(1e-12, 1.0 - 1e-12);
                -(t * y.ln() + (1.0 - t) * (1.0 - y).ln())
            }
        }
    }

    /// Derivative of the loss with respect to the output pre-activation.
    fn output_delta(self, y: f64, t: f64) -> f64 {
        match self {
            Loss::Mse => (y - t) * y * (1.0 - y),
            Loss::CrossEntropy => y - t,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Weights are stored hidden-unit-major: `w1[h * input_dim + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNet {
    input_dim: usize,
    hidden_dim: usize,
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: f64,
}

/// Gradient of the loss with respect to every parameter, same layout as
/// [`MlpNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.w1.len() + 2 * self.b1.len() + 1);
        v.extend(&self.w1);
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }
}

impl MlpNet {
    /// Uniform initialization in `[-scale, scale]`.
    pub fn random(input_dim: usize, hidden_dim: usize, scale: f64, rng: &mut impl Rng) -> Result<Self> {
        check_dims(input_dim, hidden_dim)?;
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-scale..=scale)).collect() };
        let w1 = draw(input_dim * hidden_dim);
        let b1 = draw(hidden_dim);
        let w2 = draw(hidden_dim);
        let b2 = draw(1)[0];
        Ok(Self {
            input_dim,
            hidden_dim,
            w1,
            b1,
            w2,
            b2,
        })
    }

    pub fn from_parts(
        input_dim: usize,
        hidden_dim: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
    ) -> Result<Self> {
        check_dims(input_dim, hidden_dim)?;
        if w1.len() != input_dim * hidden_dim || b1.len() != hidden_dim || w2.len() != hidden_dim {
            return Err(Error::InvalidInput(
                "network parameter shapes do not match dimensions".into(),
            ));
        }
        let net = Self {
            input_dim,
            hidden_dim,
            w1,
            b1,
            w2,
            b2,
        };
        if !net.parameters().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("network parameters must be finite".into()));
        }
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    fn hidden_into(&self, x: &[f64], hidden: &mut [f64]) {
        for (h, out) in hidden.iter_mut().enumerate() {
            let row = &self.w1[h * self.input_dim..(h + 1) * self.input_dim];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[h];
            *out = sigmoid(z);
        }
    }

    fn output(&self, hidden: &[f64]) -> f64 {
        let z: f64 = self.w2.iter().zip(hidden).map(|(w, a)| w * a).sum::<f64>() + self.b2;
        sigmoid(z)
    }

    /// Network output in `(0, 1)`.
    ///
    /// # Panics
    /// Panics if `x.len() != input_dim`.
    pub fn forward(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.input_dim, "input length");
        let mut hidden = vec![0.0; self.hidden_dim];
        self.hidden_into(x, &mut hidden);
        self.output(&hidden)
    }

    pub fn loss(&self, x: &[f64], target: f64, loss: Loss) -> f64 {
        loss.value(self.forward(x), target)
    }

    /// Backpropagated gradient of the loss on one example.
    pub fn gradients(&self, x: &[f64], target: f64, loss: Loss) -> Gradients {
        let mut g = Gradients {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.hidden_dim],
            w2: vec![0.0; self.hidden_dim],
            b2: 0.0,
        };
        let mut hidden = vec![0.0; self.hidden_dim];
        self.accumulate(x, target, loss, &mut hidden, &mut g);
        g
    }

    fn accumulate(&self, x: &[f64], target: f64, loss: Loss, hidden: &mut [f64], g: &mut Gradients) -> f64 {
        assert_eq!(x.len(), self.input_dim, "input length");
        self.hidden_into(x, hidden);
        let y = self.output(hidden);
        let delta_out = loss.output_delta(y, target);
        g.b2 = delta_out;
        for (h, &a) in hidden.iter().enumerate().take(self.hidden_dim) {
            g.w2[h] = delta_out * a;
            let delta_h = delta_out * self.w2[h] * a * (1.0 - a);
            g.b1[h] = delta_h;
            let row = &mut g.w1[h * self.input_dim..(h + 1) * self.input_dim];
            for (gw, v) in row.iter_mut().zip(x) {
                *gw = delta_h * v;
            }
        }
        loss.value(y, target)
    }

    /// One stochastic gradient step; returns the loss before the update.
    pub fn sgd_step(&mut self, x: &[f64], target: f64, lr: f64, loss: Loss, scratch: &mut Scratch) -> f64 {
        let l = self.accumulate(x, target, loss, &mut scratch.hidden, &mut scratch.grads);
        self.apply(&scratch.grads, lr);
        l
    }

    pub fn apply(&mut self, g: &Gradients, lr: f64) {
        for (w, d) in self.w1.iter_mut().zip(&g.w1) {
            *w -= lr * d;
        }
        for (w, d) in self.b1.iter_mut().zip(&g.b1) {
            *w -= lr * d;
        }
        for (w, d) in self.w2.iter_mut().zip(&g.w2) {
            *w -= lr * d;
        }
        self.b2 -= lr * g.b2;
    }

    /// All parameters in `w1, b1, w2, b2` order.
    pub fn parameters(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.w1.len() + 2 * self.hidden_dim + 1);
        v.extend(&self.w1);
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    /// Inverse of [`MlpNet::parameters`].
    ///
    /// # Panics
    /// Panics on a length mismatch.
    pub fn set_parameters(&mut self, p: &[f64]) {
        let (n1, h) = (self.w1.len(), self.hidden_dim);
        assert_eq!(p.len(), n1 + 2 * h + 1, "parameter count");
        self.w1.copy_from_slice(&p[..n1]);
        self.b1.copy_from_slice(&p[n1..n1 + h]);
        self.w2.copy_from_slice(&p[n1 + h..n1 + 2 * h]);
        self.b2 = p[n1 + 2 * h];
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            hidden: vec![0.0; self.hidden_dim],
            grads: self.gradients(&vec![0.0; self.input_dim], 0.0, Loss::Mse),
        }
    }
}

/// Reusable buffers for [`MlpNet::sgd_step`].
#[derive(Debug, Clone)]
pub struct Scratch {
    hidden: Vec<f64>,
    grads: Gradients,
}

fn check_dims(input_dim: usize, hidden_dim: usize) -> Result<()> {
    if input_dim == 0 || hidden_dim == 0 {
        return Err(Error::InvalidParameter(format!(
            "network dimensions must be positive, got N={input_dim}, H={hidden_dim}"
        )));
    }
    Ok(())
}

/// Largest relative error between backpropagated and central-difference
/// gradients, `|a - n| / max(|a| + |n|, floor)`.
pub fn gradient_check(net: &MlpNet, x: &[f64], target: f64, loss: Loss, step: f64) -> f64 {
    let analytic = net.gradients(x, target, loss).flatten();
    let base = net.parameters();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (i, a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[i] = base[i] + step;
        probe.set_parameters(&p);
        let up = probe.loss(x, target, loss);
        p[i] = base[i] - step;
        probe.set_parameters(&p);
        let down = probe.loss(x, target, loss);
        let numeric = (up - down) / (2.0 * step);
        let err = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    worst
}
