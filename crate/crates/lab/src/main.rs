use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};

use noiselab_cli::checks::{all_checks, run_check};
use noiselab_cli::experiments::registry;
use noiselab_cli::{run_experiment, ExperimentConfig, LabError};

/// Total wall-clock budget for `lab validate`.
const VALIDATE_BUDGET: Duration = Duration::from_secs(20 * 60);

#[derive(Parser)]
#[command(name = "lab", version, about = "Noisy quantum and Boolean experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered experiments.
    List,
    /// Run one experiment from a config file or from flags.
    Run {
        #[arg(long, conflicts_with = "experiment")]
        config: Option<PathBuf>,
        #[arg(long)]
        experiment: Option<String>,
        /// Parameter override `key=value`; values are JSON or plain strings.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Validate {
        /// Comma-separated check ids to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

fn init_threads() -> Result<(), LabError> {
    if let Ok(v) = std::env::var("LAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| LabError::Config(format!("LAB_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(LabError::Config("LAB_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(format!("cannot set up {n} worker threads: {e}")))?;
    }
    Ok(())
}

fn run(
    config: Option<PathBuf>,
    experiment: Option<String>,
    set: Vec<String>,
    output_dir: Option<PathBuf>,
) -> Result<(), LabError> {
    let mut cfg = match (config, experiment) {
        (Some(path), _) => ExperimentConfig::from_json(&std::fs::read_to_string(&path).map_err(|e| {
            LabError::Config(format!("cannot read {}: {e}", path.display()))
        })?)?,
        (None, Some(name)) => ExperimentConfig {
            experiment: name,
            params: Default::default(),
            output_dir: PathBuf::from("lab-output"),
        },
        (None, None) => return Err(LabError::Config("give --config or --experiment".into())),
    };
    for s in &set {
        cfg.set(s)?;
    }
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    let manifest = run_experiment(&cfg)?;
    println!("{} done (config {}), outputs in {}:", manifest.experiment, manifest.config_hash, cfg.output_dir.display());
    for f in &manifest.outputs {
        println!("  {f}");
    }
    Ok(())
}

fn validate(only: &[u32]) -> bool {
    let start = Instant::now();
    let mut failed = 0;
    let mut total = 0;
    for check in all_checks().iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let report = run_check(check);
        println!("{}", report.line());
        total += 1;
        failed += usize::from(!report.passed);
    }
    let elapsed = start.elapsed();
    let in_budget = elapsed <= VALIDATE_BUDGET;
    println!(
        "{} of {total} checks passed; total runtime {:.1}s (budget {}s{})",
        total - failed,
        elapsed.as_secs_f64(),
        VALIDATE_BUDGET.as_secs(),
        if in_budget { "" } else { ", exceeded" }
    );
    failed == 0 && in_budget
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("lab: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    let result = match cli.command {
        Command::List => {
            for e in registry() {
                println!("{:<26} {}  [{}]", e.name, e.description, e.anchor);
            }
            Ok(())
        }
        Command::Run {
            config,
            experiment,
            set,
            output_dir,
        } => run(config, experiment, set, output_dir),
        Command::Validate { only } => {
            return if validate(&only) { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
