//! Random forest of CART trees: bootstrap rows, random feature subsets per split.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use super::ClassifierError;
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features tried per split; `None` means `⌈√d⌉`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: 6, min_samples_split: 2, max_features: None, bootstrap: true }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.n_trees < 1 {
            return Err(ClassifierError::InvalidParams("n_trees must be >= 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(ClassifierError::InvalidParams("max_features must be >= 1".into()));
        }
        self.tree().validate()
    }

    fn tree(&self) -> TreeParams {
        TreeParams { max_depth: self.max_depth, min_samples_split: self.min_samples_split }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `t` uses `seed.derive(t)` for its bootstrap and feature draws.
    pub fn fit(xs: &[Vec<f64>], ys: &[u8], params: &ForestParams, seed: Seed) -> Result<Self, ClassifierError> {
        params.validate()?;
        let n = xs.len();
        let d = xs[0].len();
        let max_features = params
            .max_features
            .unwrap_or_else(|| ((d as f64).sqrt().ceil() as usize).max(1))
            .min(d);
        let tree_params = params.tree();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed.derive(t as u64).rng();
                let mut idx: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit_on(xs, ys, &mut idx, &tree_params, max_features, Some(&mut rng))
            })
            .collect::<Result<_, _>>()?;
        Ok(RandomForest { trees })
    }

    /// Mean of the tree probabilities.
    pub fn proba(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.proba(x)).sum::<f64>() / self.trees.len() as f64
    }
}
