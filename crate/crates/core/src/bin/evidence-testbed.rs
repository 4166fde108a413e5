use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evidence_testbed::harness::{
    cmd_curve, cmd_evaluate, cmd_optimal, cmd_selftest, CommandOutput, ExperimentConfig,
    HarnessError, TableSource,
};

/// Compare Bayesian, certainty-factor and Dempster-Shafer evidence
/// aggregation on the block-classification domain.
#[derive(Debug, Parser)]
#[command(name = "evidence-testbed", version)]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed; overrides the configuration.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Count table CSV; overrides the configuration.
    #[arg(long, global = true, value_name = "PATH")]
    table: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic optimal guessing for the configured table.
    Optimal,
    /// Reversal and guessing comparators for every expert and calculus.
    Evaluate,
    /// Mean guesses against bag size.
    Curve,
    /// Built-in invariant checks.
    Selftest,
}

fn config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(table) = &cli.table {
        cfg.table = TableSource::Csv(table.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(output: &CommandOutput, print_csv: bool) {
    if print_csv {
        print!("{}", output.csv);
    }
    for note in &output.notes {
        println!("{note}");
    }
    eprintln!(
        "wrote {} ({} ms)",
        output.csv_path.display(),
        output.manifest.duration_ms
    );
}

fn run(cli: &Cli) -> Result<i32, HarnessError> {
    let cfg = config(cli)?;
    match cli.command {
        Command::Optimal => report(&cmd_optimal(&cfg)?, true),
        Command::Evaluate => report(&cmd_evaluate(&cfg)?, false),
        Command::Curve => report(&cmd_curve(&cfg)?, false),
        Command::Selftest => {
            let result = cmd_selftest(&cfg)?;
            print!("{}", result.render());
            return Ok(result.exit_code());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("evidence-testbed: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
