//! Thin command-line front end. Exit codes: 0 success, 1 validation or run
//! failure, 2 usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use minmax_hj::config::load_problem;
use minmax_hj::run::{export, run_compare, run_solve, to_json, write_csv, ExportFormat, RunMode};
use minmax_hj::validate::{run_validate, Suite};
use minmax_hj::Error;

const MODES: [&str; 6] = ["variational", "iterated", "hopf_lax", "lax_oleinik", "viscosity_fd", "wavefront"];
const SUITES: [&str; 6] = ["selector_axioms", "operator_estimates", "convex_equivalence", "wei_convergence", "propagation", "all"];

#[derive(Parser)]
#[command(name = "hjmm", version, about = "Minmax and viscosity solutions of Hamilton-Jacobi equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and export the snapshots.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "variational", value_parser = MODES)]
        mode: String,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
    /// Sup distance between a solver and the finite-difference reference.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "iterated", value_parser = MODES)]
        mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a group of numerical acceptance criteria; prints a JSON report.
    Validate {
        #[arg(long, default_value = "all", value_parser = SUITES)]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Characteristics (with branch ids) and the selected solution.
    Wavefront {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Expr(_) | Error::InvalidArgument(_) | Error::Incompatible(_) => 2,
        _ => 1,
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> minmax_hj::Result<()> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(config: &PathBuf, mode: RunMode, out: Option<&PathBuf>, format: &str) -> minmax_hj::Result<()> {
    let cfg = load_problem(config)?;
    let result = run_solve(&cfg, mode)?;
    let format: ExportFormat = format.parse()?;
    match out {
        Some(path) => export(&result, format, path),
        None => match format {
            ExportFormat::Csv => write_csv(&result, std::io::stdout().lock()),
            ExportFormat::Json => emit(&(to_json(&result)? + "\n"), None),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve { config, mode, out, format } => mode.parse().and_then(|m| solve(config, m, out.as_ref(), format)).map(|_| true),
        Command::Wavefront { config, out, format } => solve(config, RunMode::Wavefront, out.as_ref(), format).map(|_| true),
        Command::Compare { config, mode, out } => (|| {
            let cfg = load_problem(config)?;
            let report = run_compare(&cfg, mode.parse()?)?;
            emit(&(serde_json::to_string_pretty(&report)? + "\n"), out.as_ref())?;
            Ok(true)
        })(),
        Command::Validate { suite, out } => (|| {
            let suite: Suite = suite.parse()?;
            let report = run_validate(suite);
            for r in &report.records {
                eprintln!("{}", r.line());
            }
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            emit(&(serde_json::to_string_pretty(&report)? + "\n"), out.as_ref())?;
            Ok(report.all_pass)
        })(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
