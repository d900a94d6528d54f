//! End-to-end classification pipeline: fit the base jump density on the
//! training range, build frames, split, rebalance the training part, then
//! train and evaluate every configured classifier on each feature kind.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{evaluate, train, ClassificationReport, ClassifierError, ClassifierSpec};
use crate::features::{
    build_percent_frame, build_ref_frame, rebalance, split, DetectionContext, FeatureError, FeatureKind, PriceSeries, SplitSpec,
};
use crate::levy::{ig_fit, InverseGaussianParams, LevyError};
use crate::rng::Seed;
use crate::seqtest::{negative_jumps, percent_changes, DetectorConfig};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("fitting the base density on the training range: {0}")]
    Fit(#[from] LevyError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("{classifier} on {kind:?} features: {source}")]
    Classifier {
        classifier: String,
        kind: FeatureKind,
        source: ClassifierError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub n: usize,
    pub detector: DetectorConfig,
    pub seed: Seed,
    pub split: SplitSpec,
    /// Majority-to-minority cap for the training frame; `None` disables rebalancing.
    pub rebalance_ratio: Option<f64>,
    pub features: Vec<FeatureKind>,
    pub classifiers: Vec<ClassifierSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub feature_kind: FeatureKind,
    pub classifier: String,
    pub train_counts: (usize, usize),
    pub test_counts: (usize, usize),
    pub report: ClassificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub training_nu: InverseGaussianParams,
    pub results: Vec<PipelineResult>,
}

/// ν fitted on negative percent changes among the prices of the training range.
pub fn fit_training_nu(series: &PriceSeries, spec: &SplitSpec) -> Result<InverseGaussianParams, PipelineError> {
    spec.validate(series.len())?;
    let r = spec.train_range;
    let jumps = negative_jumps(&percent_changes(&series.closes[r.start..=r.end]));
    Ok(ig_fit(&jumps)?)
}

pub fn run_pipeline(series: &PriceSeries, cfg: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    let nu = fit_training_nu(series, &cfg.split)?;
    let ctx = DetectionContext { nu, config: cfg.detector, seed: cfg.seed };
    let mut results = Vec::new();
    for (k, &kind) in cfg.features.iter().enumerate() {
        let frame = match kind {
            FeatureKind::PercentChanges => build_percent_frame(series, cfg.n, &ctx)?,
            FeatureKind::RightExitFrequencies => build_ref_frame(series, cfg.n, &ctx)?,
        };
        let (train_frame, test_frame) = split(&frame, &cfg.split, series.len())?;
        let train_frame = match cfg.rebalance_ratio {
            Some(ratio) => rebalance(&train_frame, ratio, cfg.seed.derive2(1_000, k as u64))?,
            None => train_frame,
        };
        for spec in &cfg.classifiers {
            let wrap = |source| PipelineError::Classifier { classifier: spec.kind.name().to_string(), kind, source };
            let model = train(spec, &train_frame).map_err(wrap)?;
            let report = evaluate(&model, &test_frame).map_err(wrap)?;
            results.push(PipelineResult {
                feature_kind: kind,
                classifier: spec.kind.name().to_string(),
                train_counts: train_frame.class_counts(),
                test_counts: test_frame.class_counts(),
                report,
            });
        }
    }
    Ok(PipelineReport { training_nu: nu, results })
}
