//! Synthetic study classes and the scored study run.

use levyjump::levy::{InverseGaussianParams, TiltedInverseGaussian};
use levyjump::seqtest::{negative_jumps, percent_changes};
use levyjump::study::*;
use levyjump::Seed;

mod common;
use common::mean_se;

#[test]
fn class_specs() {
    for class in StudyClass::TEST_CLASSES {
        let s = class.spec(100, 30, 500);
        assert_eq!((s.n_processes, s.n_periods_each), (100, 30));
        assert!(s.validate().is_ok());
        assert_eq!(class.to_string().parse::<StudyClass>().unwrap(), class);
    }
    let train = StudyClass::Training.spec(100, 30, 500);
    assert_eq!((train.n_processes, train.n_periods_each, train.tilt), (1, 500, 0.0));
    assert_eq!(StudyClass::Control.expected_label(), 0);
    assert_eq!(StudyClass::Subtle.expected_label(), 1);
    assert!("large".parse::<StudyClass>().is_err());
    let bad = StudySpec { diffusion: 0.0, ..train };
    assert!(generate_class(&bad, Seed(1)).is_err());
}

#[test]
fn increments_follow_the_class_law() {
    // mean increment = drift - (1 + tilt m₁) · E_tilted[J]
    let base = InverseGaussianParams::new(1.0, 1.0).unwrap();
    for class in [StudyClass::Control, StudyClass::Obvious, StudyClass::Subtle] {
        let spec = class.spec(2000, 11, 500);
        let paths = generate_class(&spec, Seed(17)).unwrap();
        let incs: Vec<f64> = paths.iter().flat_map(|p| p.windows(2).map(|w| w[1] - w[0])).collect();
        let law = TiltedInverseGaussian::new(base, spec.tilt).unwrap();
        let want = spec.drift - law.total_mass() * law.mean();
        let (m, se) = mean_se(&incs);
        assert!((m - want).abs() < 4.0 * se, "{class}: {m} vs {want}");
        assert!(paths.iter().all(|p| p[0] == 100.0 && p.len() == 11));
    }
}

#[test]
fn positive_paths_and_reproducibility() {
    let spec = StudyClass::Obvious.spec(200, 30, 500);
    let a = generate_positive_class(&spec, Seed(5), StudyClass::Obvious).unwrap();
    assert!(a.iter().flatten().all(|v| *v > 0.0));
    assert_eq!(a, generate_positive_class(&spec, Seed(5), StudyClass::Obvious).unwrap());
    // paths already positive are kept as drawn
    let raw = generate_class(&spec, Seed(5)).unwrap();
    for (x, y) in raw.iter().zip(&a) {
        if x.iter().all(|v| *v > 0.0) {
            assert_eq!(x, y);
        }
    }
    let mut buf = Vec::new();
    write_path_csv(&a[0], &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("period,value\n0,100\n"));
}

#[test]
fn study_run_is_reproducible_and_complete() {
    let cfg = StudyConfig { n_processes: 20, ..Default::default() };
    let r = run_study(&cfg, Seed(3)).unwrap();
    assert_eq!(r, run_study(&cfg, Seed(3)).unwrap());
    assert_eq!(r.entries.len(), 6);
    for class in StudyClass::TEST_CLASSES {
        for method in [Method::Detector, Method::Naive] {
            assert!(r.correct(class, method).unwrap() <= 20);
        }
    }
    assert!(r.correct(StudyClass::Training, Method::Detector).is_none());
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "class,method,correct,total,seed");
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn detector_flags_only_windows_the_baseline_flags() {
    // structural: the detector labels 1 only when the tilt estimate is
    // positive, i.e. when the window's mean jump exceeds the training mean
    let cfg = StudyConfig { n_processes: 40, ..Default::default() };
    let r = run_study(&cfg, Seed(4)).unwrap();
    for class in StudyClass::TEST_CLASSES {
        let det = r.correct(class, Method::Detector).unwrap();
        let naive = r.correct(class, Method::Naive).unwrap();
        if class.expected_label() == 0 {
            assert!(det >= naive, "{class}: {det} < {naive}");
        } else {
            assert!(det <= naive, "{class}: {det} > {naive}");
        }
    }
}

#[test]
fn fixture_generator() {
    let spec = FixtureSpec { len: 300, ..Default::default() };
    let s = fixture_series(&spec, Seed(1)).unwrap();
    assert_eq!(s.len(), 300);
    assert_eq!(s.closes[0], spec.start_value);
    assert!(!negative_jumps(&percent_changes(&s.closes)).is_empty());
    assert!(fixture_series(&FixtureSpec { len: 1, ..spec }, Seed(1)).is_err());
}
