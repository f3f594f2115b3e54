//! skiff: closed-loop trajectory-tracking experiments for twin-propeller
//! surface vessels.

use clap::{Parser, Subcommand};
use skiff_cli::config::RunConfig;
use skiff_cli::{resolve_out_dir, run_simulate, run_sweep, run_validate, CliError};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "skiff",
    version,
    about = "Trajectory tracking experiments for twin-propeller surface vessels",
    after_help = "Exit codes: 0 success, 1 internal error, 2 configuration error, \
                  3 simulation failure, 4 self-checks failed."
)]
struct Cli {
    /// Configuration file (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: config out_dir, then $SKIFF_OUT_DIR, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel episodes (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo batch of tracking episodes.
    Simulate {
        /// Controller kind, overriding the configuration.
        #[arg(long)]
        controller: Option<String>,
        /// Master seed, overriding the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Grid of controllers against current speeds and directions.
    Sweep {
        /// Master seed, overriding the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Numerical self-checks of geometry, Jacobians, solvers, dissipation.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }

    let (mut config, config_dir) = match &cli.config {
        Some(path) => {
            let dir = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."))
                .to_path_buf();
            (RunConfig::load(path)?, dir)
        }
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    let out_dir = resolve_out_dir(cli.out.as_deref(), &config);
    let mut stdout = std::io::stdout().lock();

    match cli.command {
        Command::Simulate { controller, seed } => {
            if let Some(kind) = controller {
                config.controller.kind = kind;
            }
            if let Some(seed) = seed {
                config.episode.seed = seed;
            }
            run_simulate(&config, &config_dir, &out_dir, &mut stdout)
        }
        Command::Sweep { seed } => {
            if let Some(seed) = seed {
                config.episode.seed = seed;
            }
            run_sweep(&config, &config_dir, &out_dir, &mut stdout)
        }
        Command::Validate { seed } => run_validate(&config, &config_dir, seed, &mut stdout),
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
