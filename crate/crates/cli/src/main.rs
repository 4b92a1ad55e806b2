use std::path::PathBuf;
use std::process::ExitCode;

use acgm_core::SolverKind;
use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::BoundsArgs;
use config::RunSettings;

/// Accelerated composite gradient solvers and their benchmarks.
///
/// Traces are written as CSV with columns `k,wtu,F,L,A,backtracks`.
#[derive(Parser, Debug)]
#[command(name = "acgm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver and write its trace
    Run {
        #[arg(long, value_parser = parse_solver)]
        solver: Option<SolverKind>,
        #[command(flatten)]
        settings: RunSettings,
    },
    /// Run several solvers on the same instance, one long-format CSV
    Compare {
        /// Comma-separated, e.g. acgm_ex,amgs,fista
        #[arg(long, value_delimiter = ',', value_parser = parse_solver)]
        solvers: Vec<SolverKind>,
        #[command(flatten)]
        settings: RunSettings,
    },
    /// Tabulate the worst-case weight floor and objective-gap envelope
    Bounds {
        #[arg(long = "L-u")]
        l_u: f64,
        #[arg(long, default_value_t = 0.0)]
        mu_f: f64,
        #[arg(long, default_value_t = 0.0)]
        mu_psi: f64,
        /// Number of rows K
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        /// Distance from the starting point to a minimizer
        #[arg(long, default_value_t = 1.0)]
        dist0: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the known-solution self-check suite
    Verify {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: acgm_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Run { solver, settings } => commands::cmd_run(settings, solver),
        Command::Compare { solvers, settings } => commands::cmd_compare(settings, solvers),
        Command::Bounds { l_u, mu_f, mu_psi, iterations, dist0, output } => {
            commands::cmd_bounds(BoundsArgs { l_u, mu_f, mu_psi, iterations, dist0, output })
        }
        Command::Verify { inject_fault } => commands::cmd_verify(inject_fault),
    };
    match status {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
