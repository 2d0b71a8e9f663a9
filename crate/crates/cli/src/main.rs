//! CLI front end: `feedsolve solve | analyze | bench`, driven by a spec
//! file with optional flag overrides. Exit codes: 0 on success, 2 for
//! unusable specs, 3 for numeric failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use feedsolve_cli::error::CliError;
use feedsolve_cli::spec::{self, Overrides};
use feedsolve_cli::run;

#[derive(Parser)]
#[command(name = "feedsolve", version, about = "Run recurrence systems through parallel fixed-point solvers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one solve and write its trace and summary files.
    Solve(CommonArgs),
    /// Report dependency depth and predicted times without solving.
    Analyze(CommonArgs),
    /// Run repeated seeded solves per method and write a CSV table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Override the solver method.
    #[arg(long)]
    method: Option<String>,
    /// Override the stopping tolerance.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Override the model seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Override the summary path (the table path under `bench`).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of seeded repeats per method.
    #[arg(long)]
    repeats: Option<usize>,
}

fn overrides_of(args: &CommonArgs, repeats: Option<usize>) -> Overrides {
    Overrides {
        method: args.method.clone(),
        epsilon: args.epsilon,
        seed: args.seed,
        trace: args.trace.clone(),
        summary: args.summary.clone(),
        repeats,
    }
}

fn load(args: &CommonArgs, repeats: Option<usize>) -> Result<spec::ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.spec.display())))?;
    spec::parse_experiment_spec(&text, &overrides_of(args, repeats))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Solve(args) => {
            let spec = load(&args, None)?;
            run::run_solve(&spec)
        }
        Cmd::Analyze(args) => {
            let spec = load(&args, None)?;
            let report = run::run_analyze(&spec)?;
            print!("{report}");
            Ok(())
        }
        Cmd::Bench(args) => {
            let mut spec = load(&args.common, args.repeats)?;
            if let Some(summary) = &args.common.summary {
                spec.table_path = summary.clone();
            }
            let table = run::run_bench(&spec)?;
            print!("{table}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
