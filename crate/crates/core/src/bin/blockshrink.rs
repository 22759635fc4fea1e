use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blockshrink::estimators::{DensityFlag, EstimatorTag};
use blockshrink::harness::{
    cmd_bounds, cmd_fit, cmd_simulate, cmd_table1, write_bounds_csv, ExperimentConfig, FitInput,
    LOG_ENV,
};
use blockshrink::{Error, Result};

#[derive(Parser)]
#[command(
    name = "blockshrink",
    version,
    about = "Blockwise-shrinkage series regression and its Monte Carlo harness"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command; they override the config file.
#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in scenario names, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    scenario: Option<Vec<String>>,
    /// Sample sizes, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Scale parameters of the exponential-scale scenarios.
    #[arg(long, global = true, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Additive components 1..3 compared against the base cells.
    #[arg(long, global = true, value_delimiter = ',')]
    g: Option<Vec<usize>>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run the split estimators on the whole sample.
    #[arg(long, global = true)]
    no_split: bool,
    /// Density cutoff family of the data-driven estimator.
    #[arg(long, global = true, value_parser = parse_flag)]
    flag: Option<DensityFlag>,
}

#[derive(Subcommand)]
enum Command {
    /// Write simulated datasets as CSV.
    Simulate,
    /// Fit one estimator and write its coefficients and curve.
    Fit {
        /// Dataset CSV with header x,z1..zD,y.
        #[arg(long, conflicts_with = "theta", required_unless_present = "theta")]
        data: Option<PathBuf>,
        /// JSON with true coefficients for a dataset-free oracle fit.
        #[arg(long)]
        theta: Option<PathBuf>,
        #[arg(long, default_value = "S", value_parser = parse_tag)]
        estimator: EstimatorTag,
    },
    /// Replicated risk comparison of the dealer, data-driven and baseline
    /// estimators.
    Table1,
    /// Asymptotic minimax lower bounds.
    Bounds {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Constant pivot of discrete-response bounds.
        #[arg(long)]
        pivot: Option<f64>,
    },
}

fn parse_tag(s: &str) -> std::result::Result<EstimatorTag, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_flag(s: &str) -> std::result::Result<DensityFlag, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &c.scenario {
        cfg.scenario = v.clone();
    }
    if let Some(v) = &c.n {
        cfg.n = v.clone();
    }
    if let Some(v) = &c.lambda {
        cfg.lambda = v.clone();
    }
    if let Some(v) = &c.g {
        cfg.g = v.clone();
    }
    if let Some(v) = c.reps {
        cfg.reps = v;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.workers {
        cfg.workers = v;
    }
    if let Some(v) = &c.out {
        cfg.out = v.clone();
    }
    if c.no_split {
        cfg.estimator.no_split = true;
    }
    if let Some(v) = c.flag {
        cfg.estimator.flag = v;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Simulate => {
            for path in cmd_simulate(&cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Fit {
            data,
            theta,
            estimator,
        } => {
            let input = match (&data, &theta) {
                (Some(d), _) => FitInput::Dataset(d),
                (None, Some(t)) => FitInput::Oracle(t),
                (None, None) => return Err(Error::Config("fit needs --data or --theta".into())),
            };
            let out = cmd_fit(input, estimator, &cfg)?;
            println!("{}", out.estimate.display());
            println!("{}", out.curve.display());
        }
        Command::Table1 => {
            let report = cmd_table1(&cfg)?;
            print!("{}", report.table_text());
            if report.guard_events > 0 {
                log::warn!(
                    "{} denominators raised to the guard floor",
                    report.guard_events
                );
            }
        }
        Command::Bounds { alpha, q, pivot } => {
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            if let Some(v) = q {
                cfg.q = v;
            }
            if pivot.is_some() {
                cfg.pivot = pivot;
            }
            let rows = cmd_bounds(&cfg)?;
            write_bounds_csv(&rows, std::io::stdout())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
