//! Daily close series: CSV ingestion and summary statistics.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::seqtest::percent_changes;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub date_column: String,
    pub close_column: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema { date_column: "date".into(), close_column: "close".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub closes: Vec<f64>,
}

impl PriceSeries {
    /// Sorts by date and validates.
    pub fn new(mut rows: Vec<(NaiveDate, f64)>) -> Result<Self, FeatureError> {
        if rows.is_empty() {
            return Err(FeatureError::Empty);
        }
        if let Some((i, (_, v))) = rows.iter().enumerate().find(|(_, (_, v))| !(*v > 0.0) || !v.is_finite()) {
            return Err(FeatureError::BadClose { row: i + 1, value: v.to_string() });
        }
        rows.sort_by_key(|r| r.0);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(FeatureError::DuplicateDate(w[0].0));
        }
        let (dates, closes) = rows.into_iter().unzip();
        Ok(PriceSeries { dates, closes })
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    pub fn changes(&self) -> Vec<f64> {
        self.closes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn percent_changes(&self) -> Vec<f64> {
        percent_changes(&self.closes)
    }
}

pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<PriceSeries, FeatureError> {
    let file = std::fs::File::open(path).map_err(|e| FeatureError::Io { path: path.display().to_string(), source: e })?;
    ingest_reader(file, schema)
}

/// Rows are numbered from 1 after the header.
pub fn ingest_reader<R: Read>(reader: R, schema: &CsvSchema) -> Result<PriceSeries, FeatureError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| FeatureError::MissingColumn(name.to_string()))
    };
    let (di, ci) = (col(&schema.date_column)?, col(&schema.close_column)?);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| FeatureError::Parse { row, message: e.to_string() })?;
        let date_s = rec.get(di).unwrap_or("");
        let close_s = rec.get(ci).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_s, "%Y-%m-%d")
            .map_err(|e| FeatureError::Parse { row, message: format!("date {date_s:?}: {e}") })?;
        let close: f64 = close_s
            .parse()
            .map_err(|e| FeatureError::Parse { row, message: format!("close {close_s:?}: {e}") })?;
        if !(close > 0.0) || !close.is_finite() {
            return Err(FeatureError::BadClose { row, value: close_s.to_string() });
        }
        rows.push((date, close));
    }
    PriceSeries::new(rows)
}

pub fn write_series_csv<W: std::io::Write>(series: &PriceSeries, writer: W) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "close"])?;
    for (d, c) in series.dates.iter().zip(&series.closes) {
        w.write_record([d.format("%Y-%m-%d").to_string(), c.to_string()])?;
    }
    w.flush().map_err(|e| FeatureError::Io { path: "<writer>".into(), source: e })?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
}

impl Stats {
    fn of(xs: &[f64]) -> Stats {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        Stats {
            mean: xs.iter().sum::<f64>() / n as f64,
            median,
            max: sorted[n - 1],
            min: sorted[0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub daily_change: Stats,
    pub daily_percent_change: Stats,
}

pub fn summary_stats(s: &PriceSeries) -> Result<SummaryStats, FeatureError> {
    if s.len() < 2 {
        return Err(FeatureError::TooShort { needed: 2, got: s.len() });
    }
    Ok(SummaryStats {
        daily_change: Stats::of(&s.changes()),
        daily_percent_change: Stats::of(&s.percent_changes()),
    })
}

impl SummaryStats {
    /// Four rows (mean, median, max, min) by two columns.
    pub fn to_table(&self) -> String {
        let rows = [
            ("mean", self.daily_change.mean, self.daily_percent_change.mean),
            ("median", self.daily_change.median, self.daily_percent_change.median),
            ("max", self.daily_change.max, self.daily_percent_change.max),
            ("min", self.daily_change.min, self.daily_percent_change.min),
        ];
        let mut out = format!("{:<8}{:>16}{:>22}\n", "", "daily change", "daily percent change");
        for (name, a, b) in rows {
            out.push_str(&format!("{name:<8}{a:>16.5}{b:>22.5}\n"));
        }
        out
    }
}
