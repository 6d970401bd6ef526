//! Command-line front end: `spincorr <experiment> --config <file>
//! [--set key=value]... --out <dir>`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 capacity error.
//! `SPINCORR_THREADS` fixes the worker count; outputs are byte-identical
//! for any value.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use spincorr::runner::{csv, run_experiment, Config, Experiment};
use spincorr::Error;

#[derive(Parser)]
#[command(
    name = "spincorr",
    version,
    about = "Kicked coupled-spin simulator: quantum state and classical ensemble side by side"
)]
struct Cli {
    /// Experiment family: regime_map, relax, variance_growth,
    /// breaktime_scan, scaling_scan, ehrenfest_scan, appendix_a
    experiment: String,

    /// Key=value configuration file
    #[arg(long)]
    config: PathBuf,

    /// Override a configuration entry (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory for CSV files
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: &Cli) -> Result<(), Error> {
    let experiment = Experiment::parse(&cli.experiment)?;
    let mut config = Config::load(&cli.config)?;
    for assignment in &cli.set {
        config.set_override(assignment)?;
    }
    let start = Instant::now();
    let output = run_experiment(experiment, &config)?;
    csv::write_tables(
        &cli.out,
        experiment.name(),
        &config,
        &output.tables,
        start.elapsed().as_secs_f64(),
    )?;
    for table in &output.tables {
        println!("wrote {}", cli.out.join(&table.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SPINCORR_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("worker pool not yet initialized");
            }
            _ => {
                eprintln!("config error: SPINCORR_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                Error::Config(_) | Error::Domain(_) => ExitCode::from(2),
                Error::Capacity(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
