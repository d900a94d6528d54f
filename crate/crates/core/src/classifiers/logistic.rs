//! Logistic regression by full-batch gradient descent on standardised features.

use serde::{Deserialize, Serialize};

use super::{sigmoid, ClassifierError, Standardizer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 penalty on the weights (not the intercept).
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams { learning_rate: 0.1, epochs: 1000, l2: 0.0 }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if !(self.learning_rate > 0.0) {
            return Err(ClassifierError::InvalidParams(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if self.epochs < 1 {
            return Err(ClassifierError::InvalidParams("epochs must be >= 1".into()));
        }
        if !(self.l2 >= 0.0) {
            return Err(ClassifierError::InvalidParams(format!("l2 must be >= 0, got {}", self.l2)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub scaler: Standardizer,
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogisticModel {
    pub fn fit(xs: &[Vec<f64>], ys: &[u8], params: &LogisticParams) -> Result<Self, ClassifierError> {
        params.validate()?;
        let scaler = Standardizer::fit(xs);
        let zs: Vec<Vec<f64>> = xs.iter().map(|x| scaler.transform(x)).collect();
        let d = scaler.mean.len();
        let n = xs.len() as f64;
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut grad = vec![0.0; d];
        for _ in 0..params.epochs {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut gb = 0.0;
            for (z, &y) in zs.iter().zip(ys) {
                let err = sigmoid(dot(&w, z) + b) - y as f64;
                for (g, zi) in grad.iter_mut().zip(z) {
                    *g += err * zi;
                }
                gb += err;
            }
            for (wi, g) in w.iter_mut().zip(&grad) {
                *wi -= params.learning_rate * (g / n + params.l2 * *wi);
            }
            b -= params.learning_rate * gb / n;
        }
        Ok(LogisticModel { scaler, weights: w, intercept: b })
    }

    /// Linear score before the sigmoid; zero on the decision boundary.
    pub fn decision_function(&self, x: &[f64]) -> f64 {
        dot(&self.weights, &self.scaler.transform(x)) + self.intercept
    }

    pub fn proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision_function(x))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
