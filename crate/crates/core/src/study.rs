//! Simulation study: synthetic Lévy price paths in four classes, scored by the
//! sequential detector and by a mean-comparison baseline.
//!
//! Each period adds one jump-diffusion increment
//! `drift + diffusion·N(0,1) - Σ Jᵢ`, where the negative jumps arrive with
//! total mass `1 + tilt·E[J]` per period and have law `(1 + tilt·x)ν(dx)`
//! normalised.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levy::{ig_fit, InverseGaussianParams, LevyError, TiltedInverseGaussian};
use crate::rng::Seed;
use crate::seqtest::{detect, naive_classify, negative_jumps, percent_changes, DetectorConfig, SeqTestError};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid study spec: {0}")]
    InvalidSpec(String),
    #[error("training path has no negative jumps to fit")]
    NoTrainingJumps,
    #[error("{class} path {index} could not be drawn with all levels positive")]
    NonPositivePath { class: StudyClass, index: usize },
    #[error(transparent)]
    Levy(#[from] LevyError),
    #[error(transparent)]
    SeqTest(#[from] SeqTestError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub drift: f64,
    pub diffusion: f64,
    pub jump_params: InverseGaussianParams,
    pub tilt: f64,
    pub n_processes: usize,
    /// Observations per path, including the start value.
    pub n_periods_each: usize,
    pub start_value: f64,
}

impl StudySpec {
    pub fn validate(&self) -> Result<(), StudyError> {
        self.jump_params.validate()?;
        if self.n_processes < 1 {
            return Err(StudyError::InvalidSpec("n_processes must be >= 1".into()));
        }
        if self.n_periods_each < 2 {
            return Err(StudyError::InvalidSpec("n_periods_each must be >= 2".into()));
        }
        if !(self.diffusion > 0.0) || !self.diffusion.is_finite() {
            return Err(StudyError::InvalidSpec(format!("diffusion must be > 0, got {}", self.diffusion)));
        }
        if !(self.tilt >= 0.0) || !self.tilt.is_finite() {
            return Err(StudyError::InvalidSpec(format!("tilt must be >= 0, got {}", self.tilt)));
        }
        if !self.drift.is_finite() || !self.start_value.is_finite() {
            return Err(StudyError::InvalidSpec("drift and start_value must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyClass {
    Training,
    Control,
    Obvious,
    Subtle,
}

impl std::fmt::Display for StudyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StudyClass::Training => "training",
            StudyClass::Control => "control",
            StudyClass::Obvious => "obvious",
            StudyClass::Subtle => "subtle",
        })
    }
}

impl std::str::FromStr for StudyClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "training" => Ok(StudyClass::Training),
            "control" => Ok(StudyClass::Control),
            "obvious" => Ok(StudyClass::Obvious),
            "subtle" => Ok(StudyClass::Subtle),
            other => Err(format!("unknown class {other:?}; expected training, control, obvious or subtle")),
        }
    }
}

impl StudyClass {
    pub const TEST_CLASSES: [StudyClass; 3] = [StudyClass::Control, StudyClass::Obvious, StudyClass::Subtle];

    /// Label a correct detector assigns to this class.
    pub fn expected_label(self) -> u8 {
        match self {
            StudyClass::Training | StudyClass::Control => 0,
            StudyClass::Obvious | StudyClass::Subtle => 1,
        }
    }

    /// Default spec: drift 1, diffusion 0.5, IG(1, 1) jumps, start 100;
    /// large-jump classes use tilt 1 and the subtle class raises drift to 3.
    pub fn spec(self, n_processes: usize, test_len: usize, train_len: usize) -> StudySpec {
        let base = StudySpec {
            drift: 1.0,
            diffusion: 0.5,
            jump_params: InverseGaussianParams { mean: 1.0, scale: 1.0 },
            tilt: 0.0,
            n_processes,
            n_periods_each: test_len,
            start_value: 100.0,
        };
        match self {
            StudyClass::Training => StudySpec { n_processes: 1, n_periods_each: train_len, ..base },
            StudyClass::Control => base,
            StudyClass::Obvious => StudySpec { tilt: 1.0, ..base },
            StudyClass::Subtle => StudySpec { tilt: 1.0, drift: 3.0, ..base },
        }
    }

    /// Stream index under the master seed; `run_study` draws class `c` from `seed.derive(c.stream())`.
    pub fn stream(self) -> u64 {
        match self {
            StudyClass::Training => 0,
            StudyClass::Control => 1,
            StudyClass::Obvious => 2,
            StudyClass::Subtle => 3,
        }
    }
}

fn generate_path(spec: &StudySpec, jumps: &TiltedInverseGaussian, seed: Seed) -> Vec<f64> {
    let mut rng = seed.rng();
    let count = Poisson::new(jumps.total_mass()).expect("positive jump mass");
    let mut x = spec.start_value;
    let mut path = Vec::with_capacity(spec.n_periods_each);
    path.push(x);
    for _ in 1..spec.n_periods_each {
        let n: f64 = rng.sample(StandardNormal);
        let k = count.sample(&mut rng) as usize;
        let jump_total: f64 = (0..k).map(|_| jumps.sample(&mut rng)).sum();
        x += spec.drift + spec.diffusion * n - jump_total;
        path.push(x);
    }
    path
}

const MAX_REDRAWS: u64 = 10_000;

/// Like [`generate_path`] but redraws (attempt `j` seeded by `seed.derive(j)`)
/// until every level is positive, so percent changes are defined.
fn generate_positive_path(spec: &StudySpec, jumps: &TiltedInverseGaussian, seed: Seed) -> Option<Vec<f64>> {
    let first = generate_path(spec, jumps, seed);
    if first.iter().all(|v| *v > 0.0) {
        return Some(first);
    }
    (1..=MAX_REDRAWS)
        .map(|j| generate_path(spec, jumps, seed.derive(j)))
        .find(|p| p.iter().all(|v| *v > 0.0))
}

/// Paths as in [`generate_class`], each conditioned on staying positive.
pub fn generate_positive_class(spec: &StudySpec, seed: Seed, class: StudyClass) -> Result<Vec<Vec<f64>>, StudyError> {
    spec.validate()?;
    let jumps = TiltedInverseGaussian::new(spec.jump_params, spec.tilt)?;
    (0..spec.n_processes)
        .into_par_iter()
        .map(|i| generate_positive_path(spec, &jumps, seed.derive(i as u64)).ok_or(StudyError::NonPositivePath { class, index: i }))
        .collect()
}

/// `n_processes` paths; path `i` uses `seed.derive(i)`.
pub fn generate_class(spec: &StudySpec, seed: Seed) -> Result<Vec<Vec<f64>>, StudyError> {
    spec.validate()?;
    let jumps = TiltedInverseGaussian::new(spec.jump_params, spec.tilt)?;
    Ok((0..spec.n_processes)
        .into_par_iter()
        .map(|i| generate_path(spec, &jumps, seed.derive(i as u64)))
        .collect())
}

/// Writes one path as CSV with columns `period,value`.
pub fn write_path_csv<W: Write>(path: &[f64], writer: W) -> Result<(), StudyError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["period", "value"])?;
    for (i, v) in path.iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub detector: DetectorConfig,
    pub n_processes: usize,
    pub test_len: usize,
    pub train_len: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { detector: DetectorConfig::default(), n_processes: 100, test_len: 30, train_len: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Detector,
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyEntry {
    pub class: StudyClass,
    pub method: Method,
    pub correct: usize,
    pub total: usize,
    pub seed: Seed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub training_nu: InverseGaussianParams,
    pub entries: Vec<StudyEntry>,
}

impl StudyReport {
    pub fn correct(&self, class: StudyClass, method: Method) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.class == class && e.method == method)
            .map(|e| e.correct)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), StudyError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["class", "method", "correct", "total", "seed"])?;
        for e in &self.entries {
            let method = match e.method {
                Method::Detector => "detector",
                Method::Naive => "naive",
            };
            w.write_record([e.class.to_string(), method.to_string(), e.correct.to_string(), e.total.to_string(), e.seed.0.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Generates the training path and three test classes (each path conditioned
/// on positive levels), fits ν on the training
/// path's negative percent jumps, and scores both methods on every test path.
pub fn run_study(cfg: &StudyConfig, seed: Seed) -> Result<StudyReport, StudyError> {
    cfg.detector.validate()?;
    let train_spec = StudyClass::Training.spec(1, cfg.test_len, cfg.train_len);
    let training = generate_positive_class(&train_spec, seed.derive(StudyClass::Training.stream()), StudyClass::Training)?.remove(0);
    let training_jumps = negative_jumps(&percent_changes(&training));
    if training_jumps.len() < 2 {
        return Err(StudyError::NoTrainingJumps);
    }
    let nu = ig_fit(&training_jumps)?;

    let mut entries = Vec::new();
    for class in StudyClass::TEST_CLASSES {
        let spec = class.spec(cfg.n_processes, cfg.test_len, cfg.train_len);
        let paths = generate_positive_class(&spec, seed.derive(class.stream()), class)?;
        let detect_seed = seed.derive(100 + class.stream());
        let labels: Vec<(u8, u8)> = paths
            .par_iter()
            .enumerate()
            .map(|(i, path)| -> Result<(u8, u8), StudyError> {
                let record = detect(path, &nu, &cfg.detector, detect_seed.derive(i as u64), 0)?;
                let jumps = negative_jumps(&percent_changes(path));
                let naive = if jumps.is_empty() { 0 } else { naive_classify(&jumps, &training_jumps)? };
                Ok((record.label, naive))
            })
            .collect::<Result<_, _>>()?;
        let want = class.expected_label();
        let total = labels.len();
        let det = labels.iter().filter(|l| l.0 == want).count();
        let naive = labels.iter().filter(|l| l.1 == want).count();
        entries.push(StudyEntry { class, method: Method::Detector, correct: det, total, seed });
        entries.push(StudyEntry { class, method: Method::Naive, correct: naive, total, seed });
    }
    Ok(StudyReport { training_nu: nu, entries })
}

/// Synthetic daily close series with alternating small- and large-jump regimes.
///
/// Daily log-return in percent is `drift + diffusion·N(0,1) - Σ Jᵢ` with jump
/// count Poisson(`jump_rate · (1 + tilt·E[J])`) and marks from the tilted law;
/// the tilt switches between 0 and `large_tilt` every `regime_length` days.
/// Dates are consecutive weekdays from `start_date`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub len: usize,
    pub start_value: f64,
    pub start_date: chrono::NaiveDate,
    pub drift: f64,
    pub diffusion: f64,
    pub jump_params: InverseGaussianParams,
    pub jump_rate: f64,
    pub large_tilt: f64,
    pub regime_length: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            len: 2530,
            start_value: 70.0,
            start_date: chrono::NaiveDate::from_ymd_opt(2009, 6, 1).expect("valid date"),
            drift: 0.6,
            diffusion: 1.5,
            jump_params: InverseGaussianParams { mean: 1.0, scale: 1.0 },
            jump_rate: 0.3,
            large_tilt: 1.0,
            regime_length: 120,
        }
    }
}

pub fn fixture_series(spec: &FixtureSpec, seed: Seed) -> Result<crate::features::PriceSeries, StudyError> {
    use chrono::{Datelike, Weekday};
    spec.jump_params.validate()?;
    if spec.len < 2 || !(spec.start_value > 0.0) || !(spec.jump_rate > 0.0) || spec.regime_length == 0 {
        return Err(StudyError::InvalidSpec(format!("bad fixture spec {spec:?}")));
    }
    let small = TiltedInverseGaussian::new(spec.jump_params, 0.0)?;
    let large = TiltedInverseGaussian::new(spec.jump_params, spec.large_tilt)?;
    let mut rng = seed.rng();
    let mut rows = Vec::with_capacity(spec.len);
    let mut date = spec.start_date;
    let mut price = spec.start_value;
    for day in 0..spec.len {
        while matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            date = date.succ_opt().expect("date in range");
        }
        rows.push((date, price));
        date = date.succ_opt().expect("date in range");
        let law = if (day / spec.regime_length).is_multiple_of(2) { &small } else { &large };
        let count = Poisson::new(spec.jump_rate * law.total_mass()).expect("positive rate").sample(&mut rng) as usize;
        let n: f64 = rng.sample(StandardNormal);
        let jumps: f64 = (0..count).map(|_| law.sample(&mut rng)).sum();
        price *= ((spec.drift + spec.diffusion * n - jumps) / 100.0).exp();
    }
    crate::features::PriceSeries::new(rows).map_err(|e| StudyError::InvalidSpec(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_specs() {
        let t = StudyClass::Training.spec(100, 30, 500);
        assert_eq!((t.n_processes, t.n_periods_each, t.drift, t.tilt), (1, 500, 1.0, 0.0));
        let o = StudyClass::Obvious.spec(100, 30, 500);
        assert_eq!((o.tilt, o.drift, o.n_periods_each), (1.0, 1.0, 30));
        let s = StudyClass::Subtle.spec(100, 30, 500);
        assert_eq!((s.tilt, s.drift), (1.0, 3.0));
        assert_eq!(StudyClass::Control.spec(100, 30, 500).start_value, 100.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = StudyClass::Control.spec(5, 30, 500);
        let a = generate_class(&spec, Seed(1)).unwrap();
        assert_eq!(a, generate_class(&spec, Seed(1)).unwrap());
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|p| p.len() == 30 && p[0] == 100.0));
    }
}
