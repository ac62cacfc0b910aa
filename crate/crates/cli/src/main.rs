use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spectral_lab_cli::{catalog, execute, ConfigFile, Overrides, RunConfig, EXIT_ERROR, SEED_ENV};

#[derive(Parser)]
#[command(name = "spectral-lab", version, about = "Outliers of low-rank perturbed random matrices: predictions and Monte Carlo checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in scenarios.
    List,
    /// Run a scenario and write rates.csv, spectrum.csv, raster.csv, summary.json and manifest.toml.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario name (same as --scenario).
    #[arg(value_name = "SCENARIO", conflicts_with = "scenario")]
    name: Option<String>,
    #[arg(long)]
    scenario: Option<String>,
    /// TOML config file or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated matrix sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "big_n")]
    n_grid: Option<Vec<usize>>,
    /// Single matrix size.
    #[arg(long = "N", value_name = "N")]
    big_n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; falls back to SPECTRAL_LAB_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    /// Output directory (default runs/<scenario>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Wall-clock budget; unfinished cells are skipped and the run exits with 3.
    #[arg(long)]
    budget_seconds: Option<f64>,
}

fn run(args: RunArgs) -> anyhow::Result<i32> {
    let file = args.config.as_deref().map(ConfigFile::load).transpose()?;
    let flags = Overrides {
        scenario: args.name.or(args.scenario),
        n_grid: args.n_grid.or(args.big_n.map(|n| vec![n])),
        trials: args.trials,
        seed: args.seed,
        beta: args.beta,
        omega: args.omega,
        out: args.out,
        jobs: args.jobs,
        budget_seconds: args.budget_seconds,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = RunConfig::resolve(file, flags, env_seed.as_deref())?;
    let (_, summary, code) = execute(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    eprintln!("wrote {}", cfg.out.display());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List => {
            print!("{}", catalog());
            0
        }
        Command::Run(args) => run(args).unwrap_or_else(|e| {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }),
    };
    ExitCode::from(code as u8)
}
