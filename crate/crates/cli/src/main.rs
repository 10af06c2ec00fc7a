use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvmaps::experiment::{self, ExperimentConfig, SummaryEntry};
use cvmaps::Error;

/// Discretized two-mode squeezed states: entropy, negativity and covariance
/// sweeps against their closed forms.
#[derive(Debug, Parser)]
#[command(name = "cvmaps", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy and log-negativity time sweep, one CSV per measure.
    Sweep(CommonArgs),
    /// Cut maps of sample qutrits against their closed forms.
    QutritDemo(CommonArgs),
    /// Invariant suite and reproduction checks; exits 1 on any failure.
    Validate(CommonArgs),
    /// Covariance-element sweep against the quadrature oracle.
    Covariance(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML experiment config; the reference setup when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn load(&self) -> cvmaps::Result<ExperimentConfig> {
        match &self.config {
            Some(path) => ExperimentConfig::from_path(path),
            None => Ok(ExperimentConfig::reference()),
        }
    }
}

enum Outcome {
    Ok,
    Failed,
}

fn print_summary(summary: &[SummaryEntry]) {
    println!("{:<16} {:>6} {:>14} {:>8}", "measure", "grid_n", "max_abs_error", "island");
    for e in summary {
        let island = if e.island_converged { "ok" } else { "open" };
        println!("{:<16} {:>6} {:>14.6e} {:>8}", e.measure, e.grid_n, e.max_abs_error, island);
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn write_report(dir: &Path, name: &str, text: &str) -> cvmaps::Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, format!("{text}\n"))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(command: &Command) -> cvmaps::Result<Outcome> {
    match command {
        Command::Sweep(args) => {
            let config = args.load()?;
            let (result, paths) = experiment::run_sweep(&config, args.out.as_deref())?;
            print_summary(&result.summary);
            print_paths(&paths);
            Ok(Outcome::Ok)
        }
        Command::Covariance(args) => {
            let config = args.load()?;
            let (result, paths) = experiment::run_covariance_sweep(&config, args.out.as_deref())?;
            print_summary(&result.summary);
            print_paths(&paths);
            Ok(Outcome::Ok)
        }
        Command::QutritDemo(args) => {
            args.load()?;
            let report = experiment::run_qutrit_demo()?;
            println!("{report}");
            if let Some(dir) = &args.out {
                write_report(dir, "qutrit_demo.txt", &report.to_string())?;
            }
            Ok(if report.passed() { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Validate(args) => {
            let config = args.load()?;
            let report = experiment::run_validate(&config)?;
            println!("{report}");
            if let Some(dir) = &args.out {
                write_report(dir, "validation.txt", &report.to_string())?;
            }
            Ok(if report.passed() { Outcome::Ok } else { Outcome::Failed })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
