//! `levyjump`: command-line driver for jump-regime detection, the simulation
//! study, classification pipelines, summary statistics and BN-S evaluation.
//!
//! Configuration comes from an optional TOML file (`--config`), then flags.
//! Exit codes: 0 success, 2 invalid configuration, 1 runtime failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levyjump::features::{FeatureKind, SplitSpec};
use levyjump::study::StudyClass;

use commands::{BnsTask, SimulateTarget};
use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "levyjump", version, about = "Jump-regime detection and classification toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Window length (percent changes per window).
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    p_star: Option<usize>,
    #[arg(long, global = true)]
    n_sims: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha0: Option<f64>,
    #[arg(long, global = true)]
    t_max: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Directory for output artifacts.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Price CSV for detect, pipeline and stats.
    #[arg(long, short, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    date_column: Option<String>,
    #[arg(long, global = true)]
    close_column: Option<String>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write study-class paths, or the synthetic fixture series.
    Simulate {
        #[arg(long, value_enum, required_unless_present = "fixture")]
        class: Option<ClassArg>,
        #[arg(long, conflicts_with = "class")]
        fixture: bool,
    },
    /// Run the simulation study for both methods.
    Study,
    /// Label every window of a price series.
    Detect,
    /// Build frames, train every classifier, report test metrics.
    Pipeline {
        #[arg(long, value_enum)]
        features: Option<FeaturesArg>,
        #[arg(long, value_enum)]
        split: Option<SplitArg>,
    },
    /// Summary statistics of daily and percent daily changes.
    Stats,
    /// BN-S model paths, correlation and Laplace transform.
    Bns {
        #[command(subcommand)]
        task: BnsCommand,
    },
}

#[derive(Subcommand)]
enum BnsCommand {
    Paths,
    Correlation {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 2000)]
        mc_paths: usize,
    },
    Laplace {
        #[arg(long, allow_negative_numbers = true)]
        re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        im: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Training,
    Control,
    Obvious,
    Subtle,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeaturesArg {
    Percent,
    Ref,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    T1,
    T2,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let c = &cli.common;
    let mut cfg = RunConfig::load(c.config.as_deref())?;
    cfg.apply(&Overrides {
        seed: c.seed,
        n: c.n,
        p_star: c.p_star,
        n_sims: c.n_sims,
        alpha0: c.alpha0,
        t_max: c.t_max,
        dt: c.dt,
        output_dir: c.out.clone(),
        input: c.input.clone(),
        date_column: c.date_column.clone(),
        close_column: c.close_column.clone(),
    });
    if let Command::Pipeline { features, split } = &cli.command {
        if let Some(f) = features {
            cfg.features = match f {
                FeaturesArg::Percent => vec![FeatureKind::PercentChanges],
                FeaturesArg::Ref => vec![FeatureKind::RightExitFrequencies],
                FeaturesArg::Both => vec![FeatureKind::PercentChanges, FeatureKind::RightExitFrequencies],
            };
        }
        if let Some(s) = split {
            cfg.split = match s {
                SplitArg::T1 => SplitSpec::t1(),
                SplitArg::T2 => SplitSpec::t2(),
            };
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    if cli.common.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    match cli.command {
        Command::Simulate { class, fixture } => {
            let target = match (fixture, class) {
                (true, _) => SimulateTarget::Fixture,
                (false, Some(c)) => SimulateTarget::Class(match c {
                    ClassArg::Training => StudyClass::Training,
                    ClassArg::Control => StudyClass::Control,
                    ClassArg::Obvious => StudyClass::Obvious,
                    ClassArg::Subtle => StudyClass::Subtle,
                }),
                (false, None) => return Err(CliError::Validation("simulate needs --class or --fixture".into())),
            };
            commands::simulate(&cfg, target)?;
        }
        Command::Study => {
            commands::study(&cfg)?;
        }
        Command::Detect => {
            commands::detect(&cfg)?;
        }
        Command::Pipeline { .. } => {
            commands::pipeline(&cfg)?;
        }
        Command::Stats => {
            commands::stats(&cfg)?;
        }
        Command::Bns { task } => {
            let task = match task {
                BnsCommand::Paths => BnsTask::Paths,
                BnsCommand::Correlation { s, t, mc_paths } => BnsTask::Correlation { s, t, mc_paths },
                BnsCommand::Laplace { re, im } => BnsTask::Laplace { re, im },
            };
            commands::bns(&cfg, task)?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
