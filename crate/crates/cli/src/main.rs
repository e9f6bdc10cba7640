//! `frogpr`: generate analytic signals, synthesize FROG measurements,
//! recover signals from them and compare results up to the ambiguity group.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use frogpr::selftest::SelftestOptions;

use commands::{CliError, Done, DEFAULT_EQUIV_TOL, DEFAULT_RECOVERY_TOL};

#[derive(Debug, Parser)]
#[command(
    name = "frogpr",
    version,
    about = "FROG phase retrieval for even-length analytic signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded random analytic signal and its spectrum.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute FROG measurements of a signal file.
    Measure {
        signal: PathBuf,
        #[arg(long)]
        l: usize,
        /// Only the 3N/2+1 entries used by recovery.
        #[arg(long)]
        plan_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a signal from a measurement file.
    Recover {
        measurements: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Bound on the verification residual (default 1e-6, or FROGPR_TOL).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Decide whether two signals agree up to sign, cyclic shift and reflection.
    CheckEquiv {
        a: PathBuf,
        b: PathBuf,
        /// Relative l2 tolerance (default 1e-6, or FROGPR_TOL).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Only signal lengths up to 20.
        #[arg(long)]
        quick: bool,
        /// Perturb one planned measurement by this relative amount in every
        /// end-to-end trial.
        #[arg(long, allow_hyphen_values = true)]
        perturb: Option<f64>,
    },
}

fn run(command: Command) -> Result<Done, CliError> {
    let env_tol = std::env::var("FROGPR_TOL").ok();
    match command {
        Command::Generate { n, seed, out } => commands::generate(n, seed, &out),
        Command::Measure {
            signal,
            l,
            plan_only,
            out,
        } => commands::measure(&signal, l, plan_only, &out),
        Command::Recover {
            measurements,
            out,
            tol,
        } => {
            let tol = commands::resolve_tol(tol, env_tol, DEFAULT_RECOVERY_TOL)?;
            commands::recover_cmd(&measurements, &out, tol)
        }
        Command::CheckEquiv { a, b, tol } => {
            let tol = commands::resolve_tol(tol, env_tol, DEFAULT_EQUIV_TOL)?;
            commands::check_equiv(&a, &b, tol)
        }
        Command::Selftest { quick, perturb } => commands::selftest(SelftestOptions {
            quick,
            perturbation: perturb,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli.command) {
        Ok(Done { mut report, ok }) => {
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            match frogpr::io::to_json_string(&report) {
                Ok(text) => println!("{text}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
