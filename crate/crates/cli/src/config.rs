//! Declarative run configuration: a TOML file, then command-line overrides.
//! The resolved value is what every output artifact echoes.

use std::path::{Path, PathBuf};

use levyjump::bns::{BnsParams, ConditionalState, PathGrid, SubordinatorSpec};
use levyjump::classifiers::ClassifierSpec;
use levyjump::features::{CsvSchema, FeatureKind, IndexRange, SplitSpec};
use levyjump::levy::InverseGaussianParams;
use levyjump::seqtest::{DetectorConfig, SeqTestError};
use levyjump::Seed;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Seed,
    /// Window length in prices-minus-one (percent changes per window).
    pub n: usize,
    pub detector: DetectorConfig,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub study: StudySizes,
    pub split: SplitSpec,
    /// Majority-to-minority cap for training frames; absent disables rebalancing.
    pub rebalance_ratio: Option<f64>,
    pub features: Vec<FeatureKind>,
    pub classifiers: Vec<ClassifierSpec>,
    /// Base jump density for `detect`; fitted on the training range when absent.
    pub nu: Option<InverseGaussianParams>,
    pub bns: BnsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: Seed(1),
            n: 30,
            detector: DetectorConfig::default(),
            output_dir: PathBuf::from("out"),
            data: DataConfig::default(),
            study: StudySizes::default(),
            split: SplitSpec::t1(),
            rebalance_ratio: Some(1.0),
            features: vec![FeatureKind::PercentChanges, FeatureKind::RightExitFrequencies],
            classifiers: ClassifierSpec::defaults(Seed(1)),
            nu: None,
            bns: BnsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub input: Option<PathBuf>,
    pub date_column: String,
    pub close_column: String,
}

impl Default for DataConfig {
    fn default() -> Self {
        let schema = CsvSchema::default();
        DataConfig { input: None, date_column: schema.date_column, close_column: schema.close_column }
    }
}

impl DataConfig {
    pub fn schema(&self) -> CsvSchema {
        CsvSchema { date_column: self.date_column.clone(), close_column: self.close_column.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySizes {
    pub n_processes: usize,
    pub test_len: usize,
    pub train_len: usize,
}

impl Default for StudySizes {
    fn default() -> Self {
        StudySizes { n_processes: 100, test_len: 30, train_len: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BnsConfig {
    pub params: BnsParams,
    pub small: SubordinatorSpec,
    pub large: SubordinatorSpec,
    pub grid: PathGrid,
    pub n_paths: usize,
    pub state: ConditionalState,
}

impl Default for BnsConfig {
    fn default() -> Self {
        let ig = |mean, scale, rate| SubordinatorSpec::inverse_gaussian(InverseGaussianParams { mean, scale }, rate).expect("valid default");
        BnsConfig {
            params: BnsParams { mu: 0.0, beta: 0.0, rho: -0.5, lambda: 1.0, theta: 0.3, sigma0_sq: 0.04 },
            small: ig(0.02, 0.05, 2.0),
            large: ig(0.1, 0.5, 0.5),
            grid: PathGrid { t0: 0.0, t1: 1.0, steps: 1000 },
            n_paths: 10,
            state: ConditionalState { t: 0.0, t_end: 1.0, x_t: 0.0, sigma_t_sq: 0.04 },
        }
    }
}

/// Flag values that replace config-file entries when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub p_star: Option<usize>,
    pub n_sims: Option<usize>,
    pub alpha0: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub date_column: Option<String>,
    pub close_column: Option<String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = Seed(v);
            for c in &mut self.classifiers {
                c.seed = Seed(v);
            }
        }
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = &o.$src { self.$($dst).+ = v.clone(); })*
            };
        }
        set!(
            n => n,
            p_star => detector.p_star,
            n_sims => detector.n_sims,
            alpha0 => detector.alpha0,
            t_max => detector.t_max,
            dt => detector.dt,
            output_dir => output_dir,
            date_column => data.date_column,
            close_column => data.close_column,
        );
        if let Some(v) = &o.input {
            self.data.input = Some(v.clone());
        }
    }

    /// Checks every invariant that does not depend on input data.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.n < 2 {
            return bad(format!("n must be >= 2, got {}", self.n));
        }
        self.detector.validate().map_err(|e| match e {
            SeqTestError::InvalidConfig(m) => CliError::Validation(m),
            other => CliError::Validation(other.to_string()),
        })?;
        if let Some(r) = self.rebalance_ratio {
            if !(r >= 1.0) {
                return bad(format!("rebalance_ratio must be >= 1, got {r}"));
            }
        }
        if let Some(nu) = &self.nu {
            nu.validate().map_err(|e| CliError::Validation(format!("nu: {e}")))?;
        }
        for c in &self.classifiers {
            c.validate().map_err(|e| CliError::Validation(format!("{}: {e}", c.kind.name())))?;
        }
        let ranges_ok = |r: IndexRange| r.start <= r.end;
        if !ranges_ok(self.split.train_range) || !ranges_ok(self.split.test_range) {
            return bad(format!("split ranges must have start <= end, got {:?}", self.split));
        }
        let s = self.study;
        if s.n_processes < 1 || s.test_len < 3 || s.train_len < 3 {
            return bad(format!("study sizes need n_processes >= 1 and lengths >= 3, got {s:?}"));
        }
        let b = &self.bns;
        let bns = |e: levyjump::bns::BnsError| CliError::Validation(format!("bns: {e}"));
        b.params.validate().map_err(bns)?;
        b.small.validate().map_err(bns)?;
        b.large.validate().map_err(bns)?;
        b.grid.validate().map_err(bns)?;
        if b.n_paths < 1 {
            return bad("bns.n_paths must be >= 1".into());
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
