//! End-to-end pipeline on the bundled fixture.

use levyjump::classifiers::{ClassifierKind, ClassifierSpec, ForestParams, LogisticParams, MlpParams, TreeParams};
use levyjump::features::{FeatureKind, SplitSpec};
use levyjump::levy::ig_fit;
use levyjump::pipeline::*;
use levyjump::seqtest::{negative_jumps, percent_changes, DetectorConfig};
use levyjump::Seed;

mod common;
use common::fixture;

fn config() -> PipelineConfig {
    let seed = Seed(2);
    PipelineConfig {
        n: 30,
        detector: DetectorConfig::default(),
        seed: Seed(7),
        split: SplitSpec::t1(),
        rebalance_ratio: Some(1.0),
        features: vec![FeatureKind::PercentChanges, FeatureKind::RightExitFrequencies],
        classifiers: vec![
            ClassifierSpec::new(ClassifierKind::Logistic(LogisticParams::default()), seed),
            ClassifierSpec::new(ClassifierKind::DecisionTree(TreeParams::default()), seed),
            ClassifierSpec::new(ClassifierKind::RandomForest(ForestParams { n_trees: 20, ..Default::default() }), seed),
            ClassifierSpec::new(ClassifierKind::FeedforwardNet(MlpParams { epochs: 20, ..Default::default() }), seed),
        ],
    }
}

#[test]
fn training_density_uses_only_the_training_range() {
    let s = fixture();
    let nu = fit_training_nu(&s, &SplitSpec::t1()).unwrap();
    let want = ig_fit(&negative_jumps(&percent_changes(&s.closes[100..=1000]))).unwrap();
    assert_eq!(nu, want);
}

#[test]
fn pipeline_reports() {
    let s = fixture();
    let cfg = config();
    let report = run_pipeline(&s, &cfg).unwrap();
    assert_eq!(report.results.len(), 8);
    for r in &report.results {
        assert_eq!(r.train_counts.0, r.train_counts.1, "balanced training frame");
        assert_eq!(r.report.total(), r.test_counts.0 + r.test_counts.1);
        assert!((0.0..=1.0).contains(&r.report.accuracy));
    }
    assert_eq!(report, run_pipeline(&s, &cfg).unwrap());
    let json = serde_json::to_string(&report).unwrap();
    assert_eq!(serde_json::from_str::<PipelineReport>(&json).unwrap(), report);
}

#[test]
fn pipeline_errors_are_typed() {
    let s = fixture();
    let cfg = PipelineConfig { split: SplitSpec::t2(), ..config() };
    assert!(run_pipeline(&s, &cfg).is_ok());
    let short = levyjump::features::PriceSeries { dates: s.dates[..1200].to_vec(), closes: s.closes[..1200].to_vec() };
    assert!(matches!(run_pipeline(&short, &config()), Err(PipelineError::Feature(_))));
}
