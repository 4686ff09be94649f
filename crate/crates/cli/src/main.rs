use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cirbo::bench::DEFAULT_REPEATS;
use cirbo_cli::commands::{self, PlaceArgs, RunArgs};
use cirbo_cli::exit;

#[derive(Parser)]
#[command(name = "cirbo", version, about = "Sparse-GP Bayesian optimisation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in a config file.
    Run {
        config: PathBuf,
        /// Replace all configured seeds with this one.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: logical cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Place inducing points on a random log-Goldstein-Price design.
    Place {
        /// Optional config whose [placement] section is used.
        config: Option<PathBuf>,
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of inducing points (default 50 or the config's value).
        #[arg(long)]
        inducing: Option<usize>,
        #[arg(long, default_value_t = commands::default_candidates())]
        candidates: usize,
    },
    /// Time greedy selection over NxM sizes, e.g. 1000x128,2000x128.
    Bench {
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate run CSVs by configuration.
    Aggregate {
        run_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    let result = match cli.command {
        Command::Run { config, seed, out, jobs } => commands::cmd_run(&RunArgs { config, seed, out, jobs }),
        Command::Place { config, strategy, out, seed, inducing, candidates } => {
            commands::cmd_place(&PlaceArgs { config, strategy, out, seed, inducing, candidates })
        }
        Command::Bench { sizes, repeats, out } => commands::cmd_bench(&sizes, repeats, out.as_deref()),
        Command::Aggregate { run_dir, out } => commands::cmd_aggregate(&run_dir, &out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::USAGE as u8)
        }
    }
}
