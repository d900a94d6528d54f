//! Staggered window frames with next-period jump-regime targets.
//!
//! A detection window with start `w` covers prices `w..=w+n`, i.e. the `n`
//! percent changes `w..w+n`. Window `w` is detected with seed `seed.derive(w)`,
//! so every target can be recomputed in isolation.
//!
//! Percent frame, row `i` (`0 <= i <= L-2n-1`): features are the changes
//! `i..i+n`, target is the label of window `i+n`.
//!
//! Right-exit frame: `b_j` is the right-exit count of window `j-n` (the window
//! ending at price `j`, `j >= n`). Row `k` (`n <= k <= L-2n`) has features
//! `b_k..b_{k+n-1}` and target `b_{k+2n-1} >= p*`.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::series::PriceSeries;
use super::FeatureError;
use crate::levy::InverseGaussianParams;
use crate::rng::Seed;
use crate::seqtest::{detect, DetectionRecord, DetectorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    PercentChanges,
    RightExitFrequencies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameRole {
    #[default]
    Full,
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRow {
    pub features: Vec<f64>,
    pub target: u8,
    pub start_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFrame {
    pub rows: Vec<FrameRow>,
    pub feature_kind: FeatureKind,
    pub n: usize,
    pub role: FrameRole,
}

impl WindowFrame {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (count of target 0, count of target 1).
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.rows.iter().filter(|r| r.target == 1).count();
        (self.rows.len() - ones, ones)
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.features.clone()).collect()
    }

    pub fn targets(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.target).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.n).map(|i| format!("f{i}")).collect();
        header.push("target".into());
        header.push("start_index".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.features.iter().map(|v| v.to_string()).collect();
            rec.push(r.target.to_string());
            rec.push(r.start_index.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| FeatureError::Io { path: "<writer>".into(), source: e })?;
        Ok(())
    }
}

/// Inputs shared by every window detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionContext {
    pub nu: InverseGaussianParams,
    pub config: DetectorConfig,
    pub seed: Seed,
}

/// Number of detection windows of length `n` in a series of `len` prices.
pub fn window_count(len: usize, n: usize) -> usize {
    len.saturating_sub(n)
}

/// Detects window `start` (prices `start..=start+n`) with seed `seed.derive(start)`.
pub fn detect_window(series: &PriceSeries, n: usize, start: usize, ctx: &DetectionContext) -> Result<DetectionRecord, FeatureError> {
    if start + n >= series.len() {
        return Err(FeatureError::TooShort { needed: start + n + 1, got: series.len() });
    }
    let prices = &series.closes[start..=start + n];
    Ok(detect(prices, &ctx.nu, &ctx.config, ctx.seed.derive(start as u64), start)?)
}

/// Detection records for the given window starts, computed in parallel.
pub fn detect_windows(
    series: &PriceSeries,
    n: usize,
    starts: impl IntoIterator<Item = usize>,
    ctx: &DetectionContext,
) -> Result<BTreeMap<usize, DetectionRecord>, FeatureError> {
    let starts: Vec<usize> = starts.into_iter().collect();
    let records: Vec<DetectionRecord> = starts
        .par_iter()
        .map(|&w| detect_window(series, n, w, ctx))
        .collect::<Result<_, _>>()?;
    Ok(starts.into_iter().zip(records).collect())
}

/// Every window of the series.
pub fn detect_all(series: &PriceSeries, n: usize, ctx: &DetectionContext) -> Result<Vec<DetectionRecord>, FeatureError> {
    check_n(n)?;
    if series.len() < n + 1 {
        return Err(FeatureError::TooShort { needed: n + 1, got: series.len() });
    }
    Ok(detect_windows(series, n, 0..window_count(series.len(), n), ctx)?.into_values().collect())
}

fn check_n(n: usize) -> Result<(), FeatureError> {
    if n < 2 {
        return Err(FeatureError::InvalidWindow(n));
    }
    Ok(())
}

pub fn percent_frame_rows(len: usize, n: usize) -> usize {
    len.saturating_sub(2 * n)
}

pub fn ref_frame_rows(len: usize, n: usize) -> usize {
    (len + 1).saturating_sub(3 * n)
}

pub fn build_percent_frame(series: &PriceSeries, n: usize, ctx: &DetectionContext) -> Result<WindowFrame, FeatureError> {
    check_n(n)?;
    if series.len() < 2 * n + 1 {
        return Err(FeatureError::TooShort { needed: 2 * n + 1, got: series.len() });
    }
    let rows = percent_frame_rows(series.len(), n);
    let cache = detect_windows(series, n, n..n + rows, ctx)?;
    let changes = series.percent_changes();
    let rows = (0..rows)
        .map(|i| FrameRow {
            features: changes[i..i + n].to_vec(),
            target: cache[&(i + n)].label,
            start_index: i,
        })
        .collect();
    Ok(WindowFrame { rows, feature_kind: FeatureKind::PercentChanges, n, role: FrameRole::Full })
}

pub fn build_ref_frame(series: &PriceSeries, n: usize, ctx: &DetectionContext) -> Result<WindowFrame, FeatureError> {
    check_n(n)?;
    if series.len() < 3 * n {
        return Err(FeatureError::TooShort { needed: 3 * n, got: series.len() });
    }
    // b_j for j in n..=L-1 is window j-n
    let cache = detect_windows(series, n, 0..window_count(series.len(), n), ctx)?;
    let b = |j: usize| cache[&(j - n)].right_exits;
    let p_star = ctx.config.p_star;
    let rows = (n..=series.len() - 2 * n)
        .map(|k| FrameRow {
            features: (k..k + n).map(|j| b(j) as f64).collect(),
            target: u8::from(b(k + 2 * n - 1) >= p_star),
            start_index: k,
        })
        .collect();
    Ok(WindowFrame { rows, feature_kind: FeatureKind::RightExitFrequencies, n, role: FrameRole::Full })
}

/// Removes majority-class rows uniformly at random until
/// `majority <= ratio · minority`. Row order is preserved.
pub fn rebalance(frame: &WindowFrame, ratio: f64, seed: Seed) -> Result<WindowFrame, FeatureError> {
    if frame.role == FrameRole::Test {
        return Err(FeatureError::Rebalance("test frames are never rebalanced".into()));
    }
    if !(ratio >= 1.0) || !ratio.is_finite() {
        return Err(FeatureError::Rebalance(format!("ratio must be >= 1, got {ratio}")));
    }
    let (zeros, ones) = frame.class_counts();
    if zeros == 0 || ones == 0 {
        return Err(FeatureError::Rebalance(format!("frame has a single class ({zeros} zeros, {ones} ones)")));
    }
    let (majority, minority_count, majority_count) = if zeros >= ones { (0u8, ones, zeros) } else { (1u8, zeros, ones) };
    let keep = ((ratio * minority_count as f64).floor() as usize).min(majority_count);
    if keep == majority_count {
        return Ok(frame.clone());
    }
    let mut rng = seed.rng();
    let mut kept = vec![false; majority_count];
    for i in sample(&mut rng, majority_count, keep).iter() {
        kept[i] = true;
    }
    let mut m = 0;
    let rows = frame
        .rows
        .iter()
        .filter(|r| {
            if r.target != majority {
                return true;
            }
            m += 1;
            kept[m - 1]
        })
        .cloned()
        .collect();
    Ok(WindowFrame { rows, ..frame.clone() })
}

/// Inclusive index interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRange {
    pub start: usize,
    pub end: usize,
}

impl IndexRange {
    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_range: IndexRange,
    pub test_range: IndexRange,
}

impl SplitSpec {
    /// Train 100..=1000, test 2000..=2500.
    pub fn t1() -> Self {
        SplitSpec {
            train_range: IndexRange { start: 100, end: 1000 },
            test_range: IndexRange { start: 2000, end: 2500 },
        }
    }

    /// Train 50..=1500, test 1600..=2450.
    pub fn t2() -> Self {
        SplitSpec {
            train_range: IndexRange { start: 50, end: 1500 },
            test_range: IndexRange { start: 1600, end: 2450 },
        }
    }

    pub fn validate(&self, series_len: usize) -> Result<(), FeatureError> {
        for (name, r) in [("train", self.train_range), ("test", self.test_range)] {
            if r.start > r.end || r.end >= series_len {
                return Err(FeatureError::Split(format!(
                    "{name} range {}..={} invalid for a series of length {series_len}",
                    r.start, r.end
                )));
            }
        }
        let (a, b) = (self.train_range, self.test_range);
        if a.start <= b.end && b.start <= a.end {
            return Err(FeatureError::Split(format!(
                "train {}..={} and test {}..={} overlap",
                a.start, a.end, b.start, b.end
            )));
        }
        Ok(())
    }
}

/// Assigns rows by `start_index` membership.
pub fn split(frame: &WindowFrame, spec: &SplitSpec, series_len: usize) -> Result<(WindowFrame, WindowFrame), FeatureError> {
    spec.validate(series_len)?;
    let pick = |r: IndexRange, role: FrameRole| WindowFrame {
        rows: frame.rows.iter().filter(|row| r.contains(row.start_index)).cloned().collect(),
        role,
        ..frame.clone()
    };
    Ok((pick(spec.train_range, FrameRole::Train), pick(spec.test_range, FrameRole::Test)))
}

/// Counts of right-exit values `0..=n_sims`.
pub fn exit_histogram(records: &[DetectionRecord], n_sims: usize) -> Vec<(usize, usize)> {
    let mut counts = vec![0usize; n_sims + 1];
    for r in records {
        counts[r.right_exits.min(n_sims)] += 1;
    }
    counts.into_iter().enumerate().collect()
}

/// Equal-width histogram on `[lo, hi]`; bins are labelled by their left edge.
pub fn value_histogram(values: impl IntoIterator<Item = f64>, bins: usize, lo: f64, hi: f64) -> Vec<(f64, usize)> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        if v >= lo && v <= hi {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    counts.into_iter().enumerate().map(|(k, c)| (lo + width * k as f64, c)).collect()
}

pub fn write_histogram_csv<W: Write, B: ToString>(bins: &[(B, usize)], writer: W) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["bin", "count"])?;
    for (b, c) in bins {
        w.write_record([b.to_string(), c.to_string()])?;
    }
    w.flush().map_err(|e| FeatureError::Io { path: "<writer>".into(), source: e })?;
    Ok(())
}
