//! Command-line front end: `analyze` real data, `simulate` scenario grids,
//! and tabulate the analytic `curve` of the minMSE weight.

pub mod analyze;
pub mod curve;
pub mod error;
pub mod input;
pub mod report;
pub mod simulate;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dynborrow::exec::Execution;
use dynborrow::sim::MetricsRow;

use crate::analyze::{AnalyzeArgs, Format};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "dynborrow", version, about = "Dynamic borrowing of external controls")]
pub struct Cli {
    /// Worker threads for bootstrap and simulation.
    #[arg(long, global = true, env = "DYNBORROW_THREADS")]
    pub threads: Option<usize>,
    /// Run replicates on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the control mean (and treatment effect) from CSV data.
    Analyze(Box<AnalyzeArgs>),
    /// Run simulation scenarios and write a metrics CSV.
    #[command(after_help = metrics_help())]
    Simulate(SimulateArgs),
    /// Tabulate the analytic bias and MSE of the minMSE weight.
    Curve(CurveArgs),
}

fn metrics_help() -> String {
    format!("Metrics CSV columns:\n  {}", MetricsRow::COLUMNS.join(", "))
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file, JSON or TOML (by extension).
    #[arg(long)]
    pub config: PathBuf,
    /// Base seed for scenarios that do not set one; overrides the file's.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Standard deviation of the internal mean estimate.
    #[arg(long)]
    pub sigma0: f64,
    /// Standard deviation of the external mean estimate.
    #[arg(long)]
    pub sigma1: f64,
    #[arg(long, default_value_t = 3.0)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// Uses the given seed or draws a fresh one and reports it on stderr.
fn seed_or_fresh(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Input("thread count must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Analyze(args) => {
            let seed = seed_or_fresh(args.seed);
            let report = analyze::analyze(&args, seed, execution)?;
            let mut out = sink(args.out.as_deref())?;
            match args.format {
                Format::Json => out.write_all(report.to_json().as_bytes())?,
                Format::Csv => report.write_csv(&mut out)?,
            }
            out.flush()?;
        }
        Command::Simulate(args) => {
            let config = simulate::read_config(&args.config)?;
            let base = match args.seed.or(simulate::config_seed(&config)) {
                Some(s) => s,
                None if simulate::needs_base_seed(&config) => seed_or_fresh(None),
                None => 0,
            };
            let scenarios = simulate::parse_scenarios(&config, base)?;
            let rows = simulate::simulate(&scenarios, execution)?;
            let mut out = sink(args.out.as_deref())?;
            simulate::write_metrics(&rows, &mut out)?;
            out.flush()?;
        }
        Command::Curve(args) => {
            let rows = curve::curve(args.sigma0, args.sigma1, args.delta_max, args.eta, args.steps)?;
            let mut out = sink(args.out.as_deref())?;
            curve::write_curve(&rows, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}
