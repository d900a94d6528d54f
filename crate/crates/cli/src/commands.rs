//! One function per subcommand. Heavy work happens inside library calls;
//! everything here is loading, dispatch and single-threaded output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use levyjump::bns::{
    correlation, correlation_monte_carlo, effective_abscissa, laplace_transform, simulate_paths, strip_bounds, Complex64,
    CorrelationInputs,
};
use levyjump::features::{
    build_percent_frame, build_ref_frame, detect_all, exit_histogram, ingest_csv, summary_stats, value_histogram, write_histogram_csv,
    write_series_csv, DetectionContext, FeatureError, FeatureKind, PriceSeries,
};
use levyjump::levy::{ig_fit, InverseGaussianParams};
use levyjump::pipeline::{fit_training_nu, run_pipeline, PipelineConfig};
use levyjump::quadrature::QuadratureSpec;
use levyjump::seqtest::{negative_jumps, percent_changes, DetectionRecord};
use levyjump::study::{fixture_series, generate_positive_class, run_study, write_path_csv, FixtureSpec, StudyClass, StudyConfig};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// Every JSON artifact carries the resolved configuration next to its payload.
#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

struct Output<'a> {
    dir: PathBuf,
    cfg: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    /// Creates the directory and drops the effective config beside the CSV outputs.
    fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        let dir = cfg.output_dir.clone();
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let mut out = Output { dir, cfg, written: Vec::new() };
        let text = cfg.to_toml();
        out.write("run_config.toml", |w| w.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("run_config.toml"), e)))?;
        Ok(out)
    }

    fn write<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        log::debug!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, body: T) -> Result<(), CliError> {
        let cfg = self.cfg;
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, &Artifact { config: cfg, body })?;
            writeln!(w).map_err(|e| CliError::io(Path::new(name), e))
        })
    }

    fn finish(self) -> Vec<PathBuf> {
        for p in &self.written {
            println!("{}", p.display());
        }
        self.written
    }
}

fn load_series(cfg: &RunConfig) -> Result<PriceSeries, CliError> {
    let path = cfg
        .data
        .input
        .as_ref()
        .ok_or_else(|| CliError::Validation("no input CSV: pass --input or set data.input".into()))?;
    let series = ingest_csv(path, &cfg.data.schema())?;
    log::info!("loaded {} prices from {}", series.len(), path.display());
    Ok(series)
}

pub enum SimulateTarget {
    Class(StudyClass),
    Fixture,
}

pub fn simulate(cfg: &RunConfig, target: SimulateTarget) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Output::new(cfg)?;
    match target {
        SimulateTarget::Fixture => {
            let series = fixture_series(&FixtureSpec::default(), cfg.seed)?;
            out.write("fixture.csv", |w| Ok(write_series_csv(&series, w)?))?;
        }
        SimulateTarget::Class(class) => {
            let s = cfg.study;
            let spec = class.spec(s.n_processes, s.test_len, s.train_len);
            // same stream as the study, so these are the paths it scores
            let paths = generate_positive_class(&spec, cfg.seed.derive(class.stream()), class)?;
            for (i, path) in paths.iter().enumerate() {
                out.write(&format!("{class}_{i:03}.csv"), |w| Ok(write_path_csv(path, w)?))?;
            }
        }
    }
    Ok(out.finish())
}

pub fn study(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let s = cfg.study;
    let study_cfg = StudyConfig { detector: cfg.detector, n_processes: s.n_processes, test_len: s.test_len, train_len: s.train_len };
    let report = run_study(&study_cfg, cfg.seed)?;
    for e in &report.entries {
        log::info!("{:>8} {:?}: {}/{}", e.class, e.method, e.correct, e.total);
    }
    let mut out = Output::new(cfg)?;
    out.write("study_report.csv", |w| Ok(report.write_csv(w)?))?;
    out.json("study_report.json", &report)?;
    Ok(out.finish())
}

#[derive(Serialize)]
struct Detections<'a> {
    training_nu: InverseGaussianParams,
    nu_source: &'static str,
    records: &'a [DetectionRecord],
}

/// Configured ν, else the training range of the split, else the whole series.
fn resolve_nu(cfg: &RunConfig, series: &PriceSeries) -> Result<(InverseGaussianParams, &'static str), CliError> {
    if let Some(nu) = cfg.nu {
        return Ok((nu, "config"));
    }
    if cfg.split.validate(series.len()).is_ok() {
        return Ok((fit_training_nu(series, &cfg.split)?, "train-range"));
    }
    Ok((ig_fit(&negative_jumps(&percent_changes(&series.closes)))?, "whole-series"))
}

pub fn detect(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let series = load_series(cfg)?;
    if series.len() < cfg.n + 1 {
        return Err(FeatureError::TooShort { needed: cfg.n + 1, got: series.len() }.into());
    }
    let (nu, nu_source) = resolve_nu(cfg, &series)?;
    let ctx = DetectionContext { nu, config: cfg.detector, seed: cfg.seed };
    let records = detect_all(&series, cfg.n, &ctx)?;
    log::info!("{} windows, {} labelled 1", records.len(), records.iter().filter(|r| r.label == 1).count());
    let mut out = Output::new(cfg)?;
    out.json("detections.json", Detections { training_nu: nu, nu_source, records: &records })?;
    let hist = exit_histogram(&records, cfg.detector.n_sims);
    out.write("exit_histogram.csv", |w| Ok(write_histogram_csv(&hist, w)?))?;
    Ok(out.finish())
}

pub fn pipeline(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let series = load_series(cfg)?;
    cfg.split.validate(series.len()).map_err(|e| CliError::Validation(e.to_string()))?;
    let pc = PipelineConfig {
        n: cfg.n,
        detector: cfg.detector,
        seed: cfg.seed,
        split: cfg.split,
        rebalance_ratio: cfg.rebalance_ratio,
        features: cfg.features.clone(),
        classifiers: cfg.classifiers.clone(),
    };
    let report = run_pipeline(&series, &pc)?;
    let ctx = DetectionContext { nu: report.training_nu, config: cfg.detector, seed: cfg.seed };

    let mut out = Output::new(cfg)?;
    let mut tables = String::new();
    for r in &report.results {
        let title = format!("{} / {}", feature_name(r.feature_kind), r.classifier);
        tables.push_str(&r.report.to_table(&title));
        tables.push('\n');
    }
    print!("{tables}");
    out.write("pipeline_tables.txt", |w| w.write_all(tables.as_bytes()).map_err(|e| CliError::io(Path::new("pipeline_tables.txt"), e)))?;
    out.json("pipeline_report.json", &report)?;

    for &kind in &cfg.features {
        let frame = match kind {
            FeatureKind::PercentChanges => build_percent_frame(&series, cfg.n, &ctx)?,
            FeatureKind::RightExitFrequencies => build_ref_frame(&series, cfg.n, &ctx)?,
        };
        out.write(&format!("frame_{}.csv", feature_name(kind)), |w| Ok(frame.write_csv(w)?))?;
    }
    let records = detect_all(&series, cfg.n, &ctx)?;
    let hist = exit_histogram(&records, cfg.detector.n_sims);
    out.write("exit_histogram.csv", |w| Ok(write_histogram_csv(&hist, w)?))?;
    let changes = series.percent_changes();
    let (lo, hi) = changes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let hist = value_histogram(changes.iter().copied(), 50, lo, hi);
    out.write("percent_change_histogram.csv", |w| Ok(write_histogram_csv(&hist, w)?))?;
    Ok(out.finish())
}

pub fn feature_name(kind: FeatureKind) -> &'static str {
    match kind {
        FeatureKind::PercentChanges => "percent",
        FeatureKind::RightExitFrequencies => "ref",
    }
}

pub fn stats(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let series = load_series(cfg)?;
    let stats = summary_stats(&series)?;
    print!("{}", stats.to_table());
    let mut out = Output::new(cfg)?;
    out.json("stats.json", stats)?;
    Ok(out.finish())
}

pub enum BnsTask {
    Paths,
    Correlation { s: f64, t: f64, mc_paths: usize },
    Laplace { re: f64, im: f64 },
}

#[derive(Serialize)]
struct CorrelationOut {
    s: f64,
    t: f64,
    formula_per_path: Vec<f64>,
    formula_mean: f64,
    monte_carlo: f64,
    mc_paths: usize,
}

#[derive(Serialize)]
struct LaplaceOut {
    z: [f64; 2],
    value: [f64; 2],
    strip: Option<(f64, f64)>,
}

pub fn bns(cfg: &RunConfig, task: BnsTask) -> Result<Vec<PathBuf>, CliError> {
    let b = &cfg.bns;
    let mut out = Output::new(cfg)?;
    match task {
        BnsTask::Paths => {
            let paths = simulate_paths(&b.params, &b.small, &b.large, &b.grid, b.n_paths, cfg.seed)?;
            for (i, p) in paths.iter().enumerate() {
                out.write(&format!("bns_path_{i:03}.csv"), |w| Ok(p.write_csv(w)?))?;
            }
        }
        BnsTask::Correlation { s, t, mc_paths } => {
            if !(b.grid.t0 < s && s < t && t <= b.grid.t1) {
                return Err(CliError::Validation(format!("need t0 < s < t <= t1, got s = {s}, t = {t}")));
            }
            let paths = simulate_paths(&b.params, &b.small, &b.large, &b.grid, b.n_paths, cfg.seed)?;
            let formula_per_path = paths
                .iter()
                .map(|p| correlation(&b.params, &b.small, &b.large, s, t, &CorrelationInputs::from_path(p, s, t)))
                .collect::<Result<Vec<_>, _>>()?;
            let formula_mean = formula_per_path.iter().sum::<f64>() / formula_per_path.len() as f64;
            let monte_carlo = correlation_monte_carlo(&b.params, &b.small, &b.large, &b.grid, s, t, mc_paths, cfg.seed.derive(1))?;
            println!("formula (mean over {} paths) {formula_mean:.6}, monte carlo {monte_carlo:.6}", paths.len());
            out.json("bns_correlation.json", CorrelationOut { s, t, formula_per_path, formula_mean, monte_carlo, mc_paths })?;
        }
        BnsTask::Laplace { re, im } => {
            let st = b.state;
            let z = Complex64::new(re, im);
            let value = laplace_transform(z, &b.params, &b.small, &b.large, &st, &QuadratureSpec::default())?;
            let strip = if st.t < st.t_end {
                Some(strip_bounds(&b.params, st.t, st.t_end, effective_abscissa(&b.small, &b.large, b.params.theta))?)
            } else {
                None
            };
            println!("phi({re} + {im}i) = {} + {}i", value.re, value.im);
            out.json("bns_laplace.json", LaplaceOut { z: [re, im], value: [value.re, value.im], strip })?;
        }
    }
    Ok(out.finish())
}
