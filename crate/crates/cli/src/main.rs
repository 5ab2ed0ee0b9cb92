use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsflow_cli::commands::{self, CliError};
use dsflow_cli::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "dsflow",
    version,
    about = "Inverse curvature flows of spacelike hypersurfaces in de Sitter space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a flow and write monitors.csv, summary.json and snapshots
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overrides `out` in the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print identity residuals of the initial hypersurface
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Closed-form quermassintegrals of coordinate slices as CSV
    SliceTable {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
        #[arg(long, default_value_t = 2.0)]
        r_max: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate A_0, A_2, xi(A_0) and the gap of a snapshot
    Inequality {
        #[arg(long)]
        snapshot: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(out) = out {
                cfg.out = out;
            }
            let report = commands::run(&cfg)?;
            println!(
                "{}: t = {:.6}, steps = {}, r_infinity = {}, bounds {}",
                report.termination,
                report.t,
                report.steps,
                report.r_infinity.map_or("-".into(), |r| format!("{r:.10}")),
                if report.bounds_passed {
                    "ok"
                } else {
                    "VIOLATED"
                }
            );
            if let dsflow_core::flow::Termination::Aborted(reason) = report.termination {
                return Err(CliError::Aborted(reason));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { config } => {
            let rows = commands::check(&RunConfig::load(&config)?)?;
            print!("{}", commands::format_check(&rows));
            if rows.iter().all(|r| r.passed()) {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(CliError::Validation("residuals above tolerance".into()))
            }
        }
        Command::SliceTable {
            n,
            r_min,
            r_max,
            steps,
            out,
        } => {
            let csv = commands::slice_table_csv(n, r_min, r_max, steps)?;
            match out {
                Some(p) => {
                    std::fs::write(&p, csv).map_err(|source| CliError::Io { path: p, source })?
                }
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Inequality { snapshot } => {
            let r = commands::inequality(&snapshot)?;
            println!(
                "A0 = {:.12e}\nA2 = {:.12e}\nxi(A0) = {:.12e}\ngap = {:.12e}",
                r.a0, r.a2, r.xi, r.gap
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            let json = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{json}");
            ExitCode::from(e.exit_code())
        }
    }
}
