mod config;
mod manifest;
mod run;

use clap::{Parser, Subcommand};
use config::CommonArgs;
use congest_core::scenario::ScenarioError;
use std::process::ExitCode;

/// Solvers for the Euler system with variable congestion.
#[derive(Debug, Parser)]
#[command(name = "congest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Numerical solution of the colliding Riemann problem, with L1 errors.
    Riemann(CommonArgs),
    /// Exact cell averages of the Riemann problem at the end time.
    ExactRiemann(CommonArgs),
    /// Convergence study on the smooth periodic pulse.
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated cell counts.
        #[arg(long, value_delimiter = ',')]
        nxs: Option<Vec<usize>>,
        #[arg(long)]
        reference_nx: Option<usize>,
    },
    /// Four colliding groups on the periodic unit square.
    Collide2d {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        case: Option<u8>,
    },
    /// Room evacuation through an exit on the lower wall.
    Evacuate {
        #[command(flatten)]
        common: CommonArgs,
        /// linear, step, random, or a constant value.
        #[arg(long)]
        profile: Option<String>,
    },
}

/// Error chain without the repetition of sources that already appear in
/// their parent's message.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let res = match &cli.command {
        Command::Riemann(a) => run::riemann(a),
        Command::ExactRiemann(a) => run::exact_riemann(a),
        Command::Convergence {
            common,
            nxs,
            reference_nx,
        } => run::convergence(common, nxs.clone(), *reference_nx),
        Command::Collide2d { common, case } => run::collide2d(common, *case),
        Command::Evacuate { common, profile } => run::evacuate(common, profile.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            let numerical = matches!(
                e.downcast_ref::<ScenarioError>(),
                Some(ScenarioError::Step { .. } | ScenarioError::Riemann(_))
            );
            ExitCode::from(if numerical { EXIT_NUMERICAL } else { EXIT_USAGE })
        }
    }
}
