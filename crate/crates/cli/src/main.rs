use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cstar_cli::commands::{run_check, run_solve};
use cstar_cli::{read_json, run_demo, CliError, DemoId, Options, Report, EXIT_MALFORMED};
use cstar_fixpoint::sampling::DEFAULT_SEED;

/// Common fixed points in C*-algebra-valued metric spaces: demos, solvers
/// and condition checkers.
#[derive(Debug, Parser)]
#[command(name = "cstarfp", version)]
struct Cli {
    /// Seed for sampled condition checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Convergence tolerance (overrides conv_tol).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration cap for solvers.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Print only the JSON report.
    #[arg(long, global = true)]
    json_only: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a built-in scenario.
    Demo {
        #[arg(value_enum)]
        id: DemoId,
        /// JSON object of parameter overrides.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a solver on a config.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a condition checker on a config.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let opts = Options {
        seed: cli.seed,
        tol: cli.tol,
        max_iter: cli.max_iter,
    };
    match &cli.command {
        Command::Demo { id, config } => {
            let overrides = config.as_deref().map(read_json).transpose()?;
            run_demo(*id, overrides, &opts)
        }
        Command::Solve { config } => run_solve(read_json(config)?, &opts),
        Command::Check { config } => run_check(read_json(config)?, &opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_MALFORMED as u8
            } else {
                0
            });
        }
    };
    match run(&cli) {
        Ok(report) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report.json).expect("report serializes")
            );
            if !cli.json_only {
                eprintln!("{}", report.summary);
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_MALFORMED as u8)
        }
    }
}
