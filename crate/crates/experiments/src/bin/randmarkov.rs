use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use randmarkov_experiments::{
    run_experiment, ExperimentConfig, ExperimentId, HarnessError, Overrides,
};

/// Simulation studies for randomized and exchangeable Markov-type tests.
#[derive(Debug, Parser)]
#[command(name = "randmarkov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Significance level.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Replications per grid point.
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Splits or permutations combined per replication.
    #[arg(long = "b-count", global = true)]
    b_count: Option<usize>,
    /// Base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for the CSV files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Use the full replication counts instead of the desk-scale defaults.
    #[arg(long = "paper-scale", global = true)]
    paper_scale: bool,
    /// Flat key = value file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interval length and coverage for a Gaussian mean.
    Ci,
    /// Power of dependent e-value combinations.
    Evals,
    /// Power of universal inference for a two-component mixture.
    Ui,
    /// Power of betting tests for a bounded mean.
    Betting,
    /// All four studies.
    All,
}

impl Command {
    fn experiments(&self) -> Vec<ExperimentId> {
        match self {
            Command::Ci => vec![ExperimentId::GaussianCi],
            Command::Evals => vec![ExperimentId::EvaluePower],
            Command::Ui => vec![ExperimentId::UiPower],
            Command::Betting => vec![ExperimentId::BettingPower],
            Command::All => ExperimentId::ALL.to_vec(),
        }
    }
}

fn overrides(cli: &Cli) -> Result<Overrides, HarnessError> {
    let file = match &cli.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let flags = Overrides {
        alpha: cli.alpha,
        reps: cli.reps,
        b_count: cli.b_count,
        seed: cli.seed,
        out: cli.out.clone(),
        paper_scale: cli.paper_scale.then_some(true),
        ..Default::default()
    };
    Ok(file.merged_with(&flags))
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let overrides = overrides(cli)?;
    // validate everything before starting any long run
    let configs = cli
        .command
        .experiments()
        .into_iter()
        .map(|id| ExperimentConfig::resolve(id, &overrides))
        .collect::<Result<Vec<_>, _>>()?;
    for cfg in &configs {
        println!("{}", run_experiment(cfg)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
