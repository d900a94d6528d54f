//! Binary classifiers for next-period jump-regime labels and their evaluation.

pub mod forest;
pub mod logistic;
pub mod metrics;
pub mod mlp;
pub mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::WindowFrame;
use crate::rng::Seed;

pub use forest::{ForestParams, RandomForest};
pub use logistic::{LogisticModel, LogisticParams};
pub use metrics::{ClassMetrics, ClassificationReport, ConfusionMatrix};
pub use mlp::{MlpModel, MlpParams, MlpWeights};
pub use tree::{DecisionTree, TreeParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("training frame is empty")]
    Empty,
    #[error("training frame has a single class")]
    SingleClass,
    #[error("expected {expected} features, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-feature centring and scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(xs: &[Vec<f64>]) -> Self {
        let d = xs[0].len();
        let n = xs.len() as f64;
        let mean: Vec<f64> = (0..d).map(|k| xs.iter().map(|x| x[k]).sum::<f64>() / n).collect();
        let scale = (0..d)
            .map(|k| {
                let var = xs.iter().map(|x| (x[k] - mean[k]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassifierKind {
    Logistic(LogisticParams),
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    FeedforwardNet(MlpParams),
}

impl ClassifierKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Logistic(_) => "logistic",
            ClassifierKind::DecisionTree(_) => "decision-tree",
            ClassifierKind::RandomForest(_) => "random-forest",
            ClassifierKind::FeedforwardNet(_) => "feedforward-net",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    #[serde(flatten)]
    pub kind: ClassifierKind,
    #[serde(default)]
    pub seed: Seed,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: Seed) -> Self {
        ClassifierSpec { kind, seed }
    }

    /// One of each kind with default hyperparameters.
    pub fn defaults(seed: Seed) -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::new(ClassifierKind::Logistic(LogisticParams::default()), seed),
            ClassifierSpec::new(ClassifierKind::DecisionTree(TreeParams::default()), seed),
            ClassifierSpec::new(ClassifierKind::RandomForest(ForestParams::default()), seed),
            ClassifierSpec::new(ClassifierKind::FeedforwardNet(MlpParams::default()), seed),
        ]
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        match &self.kind {
            ClassifierKind::Logistic(p) => p.validate(),
            ClassifierKind::DecisionTree(p) => p.validate(),
            ClassifierKind::RandomForest(p) => p.validate(),
            ClassifierKind::FeedforwardNet(p) => p.validate(),
        }
    }
}

/// Anything that scores a feature vector with a class-1 probability.
pub trait Classifier: Send + Sync {
    fn n_features(&self) -> usize;

    /// Probability of class 1 without arity checks.
    fn proba_unchecked(&self, x: &[f64]) -> f64;

    fn predict_proba(&self, x: &[f64]) -> Result<f64, ClassifierError> {
        if x.len() != self.n_features() {
            return Err(ClassifierError::Arity { expected: self.n_features(), got: x.len() });
        }
        Ok(self.proba_unchecked(x))
    }

    /// Label 1 iff the probability is at least 0.5.
    fn predict(&self, x: &[f64]) -> Result<u8, ClassifierError> {
        Ok(u8::from(self.predict_proba(x)? >= 0.5))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    Logistic(LogisticModel),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    FeedforwardNet(MlpModel),
}

impl Classifier for Model {
    fn n_features(&self) -> usize {
        match self {
            Model::Logistic(m) => m.scaler.mean.len(),
            Model::DecisionTree(m) => m.n_features,
            Model::RandomForest(m) => m.trees[0].n_features,
            Model::FeedforwardNet(m) => m.scaler.mean.len(),
        }
    }

    fn proba_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Model::Logistic(m) => m.proba(x),
            Model::DecisionTree(m) => m.proba(x),
            Model::RandomForest(m) => m.proba(x),
            Model::FeedforwardNet(m) => m.proba(x),
        }
    }
}

/// Fits on raw rows; all rows must share one length and both classes must occur.
pub fn train_rows(spec: &ClassifierSpec, xs: &[Vec<f64>], ys: &[u8]) -> Result<Model, ClassifierError> {
    spec.validate()?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(ClassifierError::Empty);
    }
    let d = xs[0].len();
    if let Some(x) = xs.iter().find(|x| x.len() != d) {
        return Err(ClassifierError::Arity { expected: d, got: x.len() });
    }
    if ys.iter().all(|&y| y == ys[0]) {
        return Err(ClassifierError::SingleClass);
    }
    Ok(match &spec.kind {
        ClassifierKind::Logistic(p) => Model::Logistic(LogisticModel::fit(xs, ys, p)?),
        ClassifierKind::DecisionTree(p) => Model::DecisionTree(DecisionTree::fit(xs, ys, p)?),
        ClassifierKind::RandomForest(p) => Model::RandomForest(RandomForest::fit(xs, ys, p, spec.seed)?),
        ClassifierKind::FeedforwardNet(p) => Model::FeedforwardNet(MlpModel::fit(xs, ys, p, spec.seed)?),
    })
}

pub fn train(spec: &ClassifierSpec, frame: &WindowFrame) -> Result<Model, ClassifierError> {
    train_rows(spec, &frame.features(), &frame.targets())
}

pub fn evaluate(model: &dyn Classifier, frame: &WindowFrame) -> Result<ClassificationReport, ClassifierError> {
    if frame.is_empty() {
        return Err(ClassifierError::Empty);
    }
    let predicted = frame
        .rows
        .iter()
        .map(|r| model.predict(&r.features))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassificationReport::from_labels(&frame.targets(), &predicted))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMode {
    #[default]
    Hard,
    Soft,
}

/// Mixing weight from a class-1 probability: hard mode rounds (0.5 goes to 1),
/// soft mode returns the probability itself.
pub fn estimate_theta(proba: f64, mode: ThetaMode) -> Result<f64, ClassifierError> {
    if !(0.0..=1.0).contains(&proba) {
        return Err(ClassifierError::InvalidProbability(proba));
    }
    Ok(match mode {
        ThetaMode::Hard => {
            if proba >= 0.5 {
                1.0
            } else {
                0.0
            }
        }
        ThetaMode::Soft => proba,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_rounding() {
        assert_eq!(estimate_theta(0.7, ThetaMode::Hard).unwrap(), 1.0);
        assert_eq!(estimate_theta(0.7, ThetaMode::Soft).unwrap(), 0.7);
        assert_eq!(estimate_theta(0.5, ThetaMode::Hard).unwrap(), 1.0);
        assert_eq!(estimate_theta(0.49, ThetaMode::Hard).unwrap(), 0.0);
        assert!(estimate_theta(1.2, ThetaMode::Soft).is_err());
    }

    #[test]
    fn spec_validation() {
        let bad = ClassifierSpec::new(ClassifierKind::DecisionTree(TreeParams { max_depth: 0, ..Default::default() }), Seed(1));
        assert!(bad.validate().is_err());
        let bad = ClassifierSpec::new(ClassifierKind::RandomForest(ForestParams { n_trees: 0, ..Default::default() }), Seed(1));
        assert!(bad.validate().is_err());
        let bad = ClassifierSpec::new(ClassifierKind::FeedforwardNet(MlpParams { learning_rate: 0.0, ..Default::default() }), Seed(1));
        assert!(bad.validate().is_err());
        for s in ClassifierSpec::defaults(Seed(1)) {
            assert!(s.validate().is_ok());
        }
    }

    #[test]
    fn single_class_rejected() {
        let spec = &ClassifierSpec::defaults(Seed(1))[0];
        assert_eq!(
            train_rows(spec, &[vec![1.0], vec![2.0]], &[1, 1]),
            Err(ClassifierError::SingleClass)
        );
    }
}
