//! CART classification tree with Gini impurity.
//!
//! Candidate splits are scanned by ascending feature index, then ascending
//! threshold (midpoints between distinct sorted values); a candidate replaces
//! the current best only on strictly lower impurity. A node splits whenever
//! it is impure and some feature varies, even at zero gain. Impurities are
//! computed from integer class counts, so the fitted tree does not depend on
//! row order.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ClassifierError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 6, min_samples_split: 2 }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.max_depth < 1 {
            return Err(ClassifierError::InvalidParams("max_depth must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(ClassifierError::InvalidParams("min_samples_split must be >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        proba: f64,
        n: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
    pub n_features: usize,
}

/// Weighted Gini impurity times the node size, from class counts.
fn gini_mass(n0: usize, n1: usize) -> f64 {
    let n = n0 + n1;
    if n == 0 {
        return 0.0;
    }
    let (a, b, t) = (n0 as f64, n1 as f64, n as f64);
    t - (a * a + b * b) / t
}

struct Builder<'a, R: Rng> {
    xs: &'a [Vec<f64>],
    ys: &'a [u8],
    params: TreeParams,
    max_features: usize,
    rng: Option<&'a mut R>,
}

impl<R: Rng> Builder<'_, R> {
    fn features(&mut self, d: usize) -> Vec<usize> {
        match self.rng.as_deref_mut() {
            Some(rng) if self.max_features < d => {
                let mut f = sample(rng, d, self.max_features).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> Node {
        let n1 = idx.iter().filter(|&&i| self.ys[i] == 1).count();
        let n0 = idx.len() - n1;
        let leaf = Node::Leaf { proba: n1 as f64 / idx.len() as f64, n: idx.len() };
        if depth >= self.params.max_depth || n0 == 0 || n1 == 0 || idx.len() < self.params.min_samples_split {
            return leaf;
        }
        let d = self.xs[idx[0]].len();
        let mut best: Option<(f64, usize, f64)> = None;
        for f in self.features(d) {
            idx.sort_by(|&a, &b| self.xs[a][f].total_cmp(&self.xs[b][f]));
            let (mut l0, mut l1) = (0usize, 0usize);
            for k in 0..idx.len() - 1 {
                if self.ys[idx[k]] == 1 {
                    l1 += 1;
                } else {
                    l0 += 1;
                }
                let (v, next) = (self.xs[idx[k]][f], self.xs[idx[k + 1]][f]);
                if v == next {
                    continue;
                }
                let score = gini_mass(l0, l1) + gini_mass(n0 - l0, n1 - l1);
                if best.is_none_or(|(s, _, _)| score < s) {
                    best = Some((score, f, 0.5 * (v + next)));
                }
            }
        }
        // zero-gain splits are taken, as on XOR-like data the gain only appears one level down
        let Some((_, feature, threshold)) = best else {
            return leaf;
        };
        idx.sort_by(|&a, &b| self.xs[a][feature].total_cmp(&self.xs[b][feature]));
        let cut = idx.partition_point(|&i| self.xs[i][feature] <= threshold);
        let (left_idx, right_idx) = idx.split_at_mut(cut);
        let left = self.build(left_idx, depth + 1);
        let right = self.build(right_idx, depth + 1);
        Node::Split { feature, threshold, left: Box::new(left), right: Box::new(right) }
    }
}

impl DecisionTree {
    pub fn fit(xs: &[Vec<f64>], ys: &[u8], params: &TreeParams) -> Result<Self, ClassifierError> {
        let mut idx: Vec<usize> = (0..xs.len()).collect();
        Self::fit_on::<rand_chacha::ChaCha8Rng>(xs, ys, &mut idx, params, usize::MAX, None)
    }

    /// Fits on the rows `idx` (duplicates allowed). When `rng` is given and
    /// `max_features` is below the feature count, each split considers a
    /// random feature subset of that size.
    pub fn fit_on<R: Rng>(
        xs: &[Vec<f64>],
        ys: &[u8],
        idx: &mut [usize],
        params: &TreeParams,
        max_features: usize,
        rng: Option<&mut R>,
    ) -> Result<Self, ClassifierError> {
        params.validate()?;
        if idx.is_empty() {
            return Err(ClassifierError::Empty);
        }
        let n_features = xs[idx[0]].len();
        let mut b = Builder { xs, ys, params: *params, max_features, rng };
        let root = b.build(idx, 0);
        Ok(DecisionTree { root, n_features })
    }

    pub fn proba(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { proba, .. } => return *proba,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(left).max(go(right)),
            }
        }
        go(&self.root)
    }
}
