use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use vibronic::harness::{self, ExperimentConfig, HarnessError, EXIT_CONFIG};

/// Vibronic electron-transfer experiments: resonance prediction, dynamics,
/// driving-force sweeps, damping-rate scans, shot retention and circuit census.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML). Reference defaults when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent grid points.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Predicted electronic and vibronic resonances.
    Resonances,
    /// Population dynamics with the configured engine.
    Evolve,
    /// Transfer probability against driving force.
    Sweep,
    /// Effective damping rate of a series.
    GammaScan,
    /// Retained shots against time and register size.
    Retention,
    /// Gate counts and execution time of one Trotter step.
    Census,
}

fn run(cli: &Cli) -> Result<String, HarnessError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.svg |= cli.svg;
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| HarnessError::config(cli.config.as_deref().unwrap_or("--workers".as_ref()), e.to_string()))?;
    }
    match cli.command {
        Command::Resonances => harness::run_resonances(&config),
        Command::Evolve => harness::run_evolve(&config),
        Command::Sweep => harness::run_sweep(&config),
        Command::GammaScan => harness::run_gamma_scan(&config),
        Command::Retention => harness::run_retention(&config),
        Command::Census => harness::run_census(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            print!("{summary}");
            if !summary.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(code >= EXIT_CONFIG);
            ExitCode::from(code as u8)
        }
    }
}
