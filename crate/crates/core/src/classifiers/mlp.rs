//! One-hidden-layer feedforward net: ReLU hidden units, sigmoid output,
//! binary cross-entropy, Adam on shuffled mini-batches.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, ClassifierError, Standardizer};
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub l2: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams { hidden: 32, epochs: 200, learning_rate: 1e-3, batch_size: 32, l2: 0.0 }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.hidden < 1 || self.epochs < 1 || self.batch_size < 1 {
            return Err(ClassifierError::InvalidParams(format!(
                "hidden, epochs and batch_size must be >= 1, got {}, {}, {}",
                self.hidden, self.epochs, self.batch_size
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(ClassifierError::InvalidParams(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if !(self.l2 >= 0.0) {
            return Err(ClassifierError::InvalidParams(format!("l2 must be >= 0, got {}", self.l2)));
        }
        Ok(())
    }
}

/// Weights in one flat vector: `w1` (hidden × inputs, row-major), `b1`
/// (hidden), `w2` (hidden), `b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpWeights {
    pub inputs: usize,
    pub hidden: usize,
    pub values: Vec<f64>,
}

impl MlpWeights {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        MlpWeights { inputs, hidden, values: vec![0.0; hidden * inputs + 2 * hidden + 1] }
    }

    /// He-uniform hidden layer, Glorot-uniform output, zero biases.
    pub fn init<R: Rng>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let mut w = Self::zeros(inputs, hidden);
        let a1 = (6.0 / inputs as f64).sqrt();
        let a2 = (6.0 / (hidden + 1) as f64).sqrt();
        let (w1_end, w2_start) = (hidden * inputs, hidden * inputs + hidden);
        for v in &mut w.values[..w1_end] {
            *v = rng.random_range(-a1..a1);
        }
        for v in &mut w.values[w2_start..w2_start + hidden] {
            *v = rng.random_range(-a2..a2);
        }
        w
    }

    fn w1(&self, j: usize) -> &[f64] {
        &self.values[j * self.inputs..(j + 1) * self.inputs]
    }

    fn b1(&self, j: usize) -> f64 {
        self.values[self.hidden * self.inputs + j]
    }

    fn w2(&self, j: usize) -> f64 {
        self.values[self.hidden * self.inputs + self.hidden + j]
    }

    fn b2(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    fn hidden_layer(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|j| (self.w1(j).iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1(j)).max(0.0))
            .collect()
    }

    /// Output logit.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let h = self.hidden_layer(x);
        (0..self.hidden).map(|j| self.w2(j) * h[j]).sum::<f64>() + self.b2()
    }

    fn l2_weights(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let w1 = 0..self.hidden * self.inputs;
        let w2 = self.hidden * self.inputs + self.hidden..self.values.len() - 1;
        w1.chain(w2).map(move |i| (i, self.values[i]))
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean binary cross-entropy plus `½·l2·‖W‖²` over the weight matrices.
pub fn loss(w: &MlpWeights, xs: &[Vec<f64>], ys: &[u8], l2: f64) -> f64 {
    let n = xs.len() as f64;
    let data: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = w.logit(x);
            softplus(z) - y as f64 * z
        })
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * w.l2_weights().map(|(_, v)| v * v).sum::<f64>()
}

/// Analytic gradient of [`loss`] by backpropagation.
pub fn gradient(w: &MlpWeights, xs: &[Vec<f64>], ys: &[u8], l2: f64) -> Vec<f64> {
    let (d, h) = (w.inputs, w.hidden);
    let n = xs.len() as f64;
    let mut g = vec![0.0; w.values.len()];
    let (b1_at, w2_at, b2_at) = (h * d, h * d + h, w.values.len() - 1);
    for (x, &y) in xs.iter().zip(ys) {
        let hid = w.hidden_layer(x);
        let z = (0..h).map(|j| w.w2(j) * hid[j]).sum::<f64>() + w.b2();
        let dz = (sigmoid(z) - y as f64) / n;
        g[b2_at] += dz;
        for j in 0..h {
            g[w2_at + j] += dz * hid[j];
            if hid[j] > 0.0 {
                let da = dz * w.w2(j);
                g[b1_at + j] += da;
                for (k, xv) in x.iter().enumerate() {
                    g[j * d + k] += da * xv;
                }
            }
        }
    }
    for (i, v) in w.l2_weights() {
        g[i] += l2 * v;
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub scaler: Standardizer,
    pub weights: MlpWeights,
}

impl MlpModel {
    pub fn fit(xs: &[Vec<f64>], ys: &[u8], params: &MlpParams, seed: Seed) -> Result<Self, ClassifierError> {
        params.validate()?;
        let scaler = Standardizer::fit(xs);
        let zs: Vec<Vec<f64>> = xs.iter().map(|x| scaler.transform(x)).collect();
        let mut rng = seed.rng();
        let mut w = MlpWeights::init(scaler.mean.len(), params.hidden, &mut rng);
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let mut m = vec![0.0; w.values.len()];
        let mut v = vec![0.0; w.values.len()];
        let mut step = 0;
        let mut order: Vec<usize> = (0..zs.len()).collect();
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(params.batch_size) {
                let bx: Vec<Vec<f64>> = batch.iter().map(|&i| zs[i].clone()).collect();
                let by: Vec<u8> = batch.iter().map(|&i| ys[i]).collect();
                let g = gradient(&w, &bx, &by, params.l2);
                step += 1;
                let (c1, c2) = (1.0 - f64::powi(b1, step), 1.0 - f64::powi(b2, step));
                for i in 0..g.len() {
                    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                    w.values[i] -= params.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                }
            }
        }
        Ok(MlpModel { scaler, weights: w })
    }

    pub fn proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.weights.logit(&self.scaler.transform(x)))
    }
}
