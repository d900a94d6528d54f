//! Price ingestion, summary statistics and window frames for classification.

pub mod frames;
pub mod series;

use chrono::NaiveDate;
use thiserror::Error;

use crate::seqtest::SeqTestError;

pub use frames::{
    build_percent_frame, build_ref_frame, detect_all, detect_window, detect_windows, exit_histogram, percent_frame_rows,
    rebalance, ref_frame_rows, split, value_histogram, window_count, write_histogram_csv, DetectionContext, FeatureKind,
    FrameRole, FrameRow, IndexRange, SplitSpec, WindowFrame,
};
pub use series::{ingest_csv, ingest_reader, summary_stats, write_series_csv, CsvSchema, PriceSeries, Stats, SummaryStats};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("no data rows")]
    Empty,
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("row {row}: close {value} is not positive")]
    BadClose { row: usize, value: String },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("series too short: need {needed} prices, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("window length must be >= 2, got {0}")]
    InvalidWindow(usize),
    #[error("rebalance: {0}")]
    Rebalance(String),
    #[error("split: {0}")]
    Split(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Detect(#[from] SeqTestError),
}
