use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sparse_lqr::experiments::{builtin_paper_config, run_to_dir, Artifact, ExperimentConfig};
use sparse_lqr::riccati_backward;

/// Finite-horizon LQR under sparse disturbances.
#[derive(Debug, Parser)]
#[command(name = "sparse-lqr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Blind, disturbance-aware, offline and nominal trajectories on one scenario.
    Simulate,
    /// First-action gap between disturbance-aware and blind policies over (T, k).
    Sweep,
    /// Norms of the disturbance-aware correction terms over (T, k).
    Diagnose,
    /// Monte Carlo check of the regret bounds.
    VerifyBounds,
    /// Print the validated configuration and model summary.
    ShowModel,
}

#[derive(Debug, Args)]
struct Overrides {
    /// TOML config; the built-in double-integrator study when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Monte Carlo trials per budget (verify-bounds).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Model horizon; for sweep/diagnose, the single horizon to evaluate.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Disturbance count (simulate), budgets 1..=n (sweep/diagnose) or the
    /// single budget D (verify-bounds).
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Run bound checks even when the stability margin is not positive.
    #[arg(long, global = true)]
    override_assumption_check: bool,
}

fn load_config(opts: &Overrides, command: &Command) -> Result<ExperimentConfig> {
    let mut config = match &opts.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => builtin_paper_config(),
    };
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(trials) = opts.trials {
        config.bounds.trials = trials;
    }
    if opts.override_assumption_check {
        config.bounds.override_assumption_check = true;
    }
    let grid = matches!(command, Command::Sweep | Command::Diagnose);
    if let Some(h) = opts.horizon {
        if grid {
            config.sweep.horizons = vec![h];
        } else {
            config.model.horizon = h;
        }
    }
    if let Some(k) = opts.budget {
        match command {
            Command::Sweep | Command::Diagnose => config.sweep.budgets = (1..=k).collect(),
            Command::VerifyBounds => config.bounds.budgets = vec![k],
            _ => {
                config.disturbance.count = k;
                config.disturbance.times = None;
            }
        }
    }
    config.validate()?;
    Ok(config)
}

fn show_model(config: &ExperimentConfig) -> Result<()> {
    print!("{}", config.to_toml_string()?);
    let model = config.system_model()?;
    let riccati = riccati_backward(&model)?;
    println!();
    println!("# state_dim = {}, input_dim = {}, horizon = {}", model.state_dim(), model.input_dim(), model.horizon);
    println!("# gamma_hat = {:.6}", riccati.gamma_hat);
    println!("# p_hat = {:.6}", riccati.p_hat);
    println!(
        "# steps with closed-loop norm >= 1: {} of {}",
        riccati.assumption1_violations(),
        model.horizon
    );
    println!("# config_hash = {}", config.config_hash()?);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let config = load_config(&cli.opts, &cli.command)?;
    let artifact = match cli.command {
        Command::ShowModel => return show_model(&config),
        Command::Simulate => Artifact::Trajectory,
        Command::Sweep => Artifact::Sweep,
        Command::Diagnose => Artifact::Diagnostics,
        Command::VerifyBounds => Artifact::Bounds,
    };
    let path = run_to_dir(artifact, &config, &cli.opts.out)
        .with_context(|| format!("running {}", artifact.basename()))?;
    println!("{}", path.display());
    Ok(())
}
