use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rofsim::bench::{
    emit_results, find_experiment, parse_config, registry, run_experiment, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "rofsim",
    version,
    about = "D-MIMO with a 1-bit radio-over-fiber fronthaul: link-level experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write results.csv and summary.json.
    Run {
        /// Experiment name, see `rofsim list`.
        experiment: String,
        /// Scenario file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Master seed.
        #[arg(long)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Repeats per grid point (overrides the config).
        #[arg(long)]
        repeats: Option<usize>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List the registered experiments.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> rofsim::error::Result<()> {
    match cli.command {
        Command::List => {
            for e in registry() {
                println!("{:<22} {}", e.name(), e.description());
            }
        }
        Command::Run {
            experiment,
            config,
            seed,
            out,
            repeats,
            workers,
        } => {
            let exp = find_experiment(&experiment)?;
            let cfg = parse_config(&config)?;
            let opts = RunOptions {
                seed,
                repeats,
                workers,
            };
            let started = std::time::Instant::now();
            let result = run_experiment(exp.as_ref(), &cfg, &opts)?;
            emit_results(&result, &out)?;
            log::info!(
                "{experiment}: {} points x {} repeats in {:.1?}, results in {}",
                result.points.len(),
                result.repeats,
                started.elapsed(),
                out.display()
            );
        }
    }
    Ok(())
}
