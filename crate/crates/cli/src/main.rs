use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use clnode_core::experiment::{self, emit_curves, pacing_curve_csv, AggregateReport, CurveKind};
use clnode_core::Error;

/// Curriculum-learning node classification experiments.
#[derive(Debug, Parser)]
#[command(name = "clnode", version)]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every arm and seed of an experiment config and write the report.
    Run {
        config: PathBuf,
        /// Write the report into this directory instead of the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only print errors.
        #[arg(long)]
        quiet: bool,
    },
    /// Check a config without running it; prints every problem found.
    Validate { config: PathBuf },
    /// Convert a report into CSV.
    Curves {
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One row per (arm, seed, epoch) instead of one per arm.
        #[arg(long)]
        epochs: bool,
    },
    /// Tabulate the three pacing functions for t = 0..=horizon.
    Pacing {
        #[arg(long)]
        initial_fraction: f64,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Json(_) => 1,
        _ => 2,
    }
}

fn write(path: &PathBuf, contents: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, out, .. } => {
            let (output, paths) = experiment::run(&config, out.as_deref())?;
            for row in &output.report.rows {
                let schedule = row
                    .schedule
                    .map(|s| {
                        format!(
                            " {}(l0={}, T={})",
                            s.kind.name(),
                            s.initial_fraction,
                            s.horizon
                        )
                    })
                    .unwrap_or_default();
                log::info!(
                    "{:<12} noise={}:{:<5}{} acc {:.4} ± {:.4}",
                    row.method.name(),
                    row.noise.name(),
                    row.noise.rate(),
                    schedule,
                    row.mean_test_acc,
                    row.std_test_acc
                );
            }
            log::info!("report written to {}", paths.report.display());
            Ok(())
        }
        Command::Validate { config } => {
            experiment::validate_config(&config)?;
            println!("{}: ok", config.display());
            Ok(())
        }
        Command::Curves {
            report,
            out,
            epochs,
        } => {
            let text = std::fs::read_to_string(&report).map_err(|e| Error::Io {
                path: report.clone(),
                source: e,
            })?;
            let report = AggregateReport::from_json(&text)?;
            let kind = if epochs {
                CurveKind::Epochs
            } else {
                CurveKind::Aggregate
            };
            write(&out, &emit_curves(&report, kind)?)
        }
        Command::Pacing {
            initial_fraction,
            horizon,
            out,
        } => write(&out, &pacing_curve_csv(initial_fraction, horizon)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = matches!(cli.command, Command::Run { quiet: true, .. });
    let level = match (quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        (false, _) => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
