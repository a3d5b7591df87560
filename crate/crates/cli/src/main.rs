use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use flyrate_cli::commands;
use flyrate_cli::{parse_algorithms, CliError, RunConfig, SeedRange};

/// Rate-adaptation simulator for a three-node flying relay network.
#[derive(Debug, Parser)]
#[command(name = "flyrate", version)]
struct Cli {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Inclusive seed range, e.g. `1..100`.
    #[arg(long, global = true)]
    seeds: Option<SeedRange>,
    /// Comma-separated controllers: minstrel, tara, ideal.
    #[arg(long, global = true)]
    algorithms: Option<String>,
    /// Simulated seconds per run.
    #[arg(long, global = true)]
    duration: Option<f64>,
    /// Output directory (default: $FLYRATE_OUT_DIR or ./flyrate-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the SNR threshold table of both links.
    Thresholds,
    /// Simulate every (seed, algorithm) pair and write run CSVs.
    Run,
    /// Compute CCDFs, percentiles, confidence intervals and gains.
    Analyze {
        /// Batch directory written by `run` (default: the output directory).
        dir: Option<PathBuf>,
    },
    /// Print the trajectories generated for one seed.
    ScenarioDump {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print the effective configuration.
    Config,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                other => other,
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(seeds) = cli.seeds {
        cfg.seeds = seeds;
    }
    if let Some(list) = &cli.algorithms {
        cfg.algorithms = parse_algorithms(list)?;
    }
    if let Some(d) = cli.duration {
        cfg.scenario.run_duration = d;
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli)?;
    let out_dir = commands::resolve_out_dir(cli.out.clone(), &cfg);
    match cli.command {
        Command::Thresholds => print!("{}", commands::thresholds(&cfg)?),
        Command::Run => {
            print!("{}", commands::run(&cfg, &out_dir)?);
            eprintln!("wrote {}", out_dir.display());
        }
        Command::Analyze { dir } => {
            let dir = dir.unwrap_or_else(|| out_dir.clone());
            print!("{}", commands::analyze(&dir, &out_dir)?);
            eprintln!("wrote statistics to {}", out_dir.display());
        }
        Command::ScenarioDump { seed } => print!("{}", commands::scenario_dump(&cfg, seed)?),
        Command::Config => print!("{}", cfg.to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flyrate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
