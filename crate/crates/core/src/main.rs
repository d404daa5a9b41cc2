use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use carmen::output::emit_outputs;
use carmen::scenario::run_scenario;
use carmen::{Error, FeatureMap, ScenarioConfig, ScenarioName, TemperingGrid};

/// Classifier-based misspecification diagnostics for tempered Bayesian updates.
#[derive(Parser)]
#[command(name = "carmen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write summary.json and curve.csv.
    Run(RunArgs),
    /// List the scenarios and their bound parameters.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario name; overrides the config file.
    #[arg(long)]
    scenario: Option<ScenarioName>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_update: Option<usize>,
    #[arg(long)]
    n_validate: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    /// Tempering grid as lo:hi:count (log-uniform) or a comma list.
    #[arg(long)]
    grid: Option<TemperingGrid>,
    /// Run the classifier at every grid point.
    #[arg(long)]
    full_curve: bool,
    /// Also estimate the reverse divergence at t*.
    #[arg(long)]
    reverse_kl: bool,
    #[arg(long)]
    ridge: Option<f64>,
    /// Comma-separated feature transforms (custom scenarios only).
    #[arg(long, value_parser = FeatureMap::parse_list)]
    features: Option<FeatureMap>,
    /// TOML file with ScenarioConfig fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn build_config(args: &RunArgs) -> carmen::Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => {
            let scenario = args
                .scenario
                .ok_or_else(|| Error::Usage("--scenario is required without --config".into()))?;
            let seed = args
                .seed
                .ok_or_else(|| Error::Usage("--seed is required without --config".into()))?;
            ScenarioConfig::new(scenario, seed)
        }
    };
    if let Some(s) = args.scenario {
        cfg.scenario = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.n_update {
        cfg.n_update = n;
    }
    if let Some(n) = args.n_validate {
        cfg.n_validate = n;
    }
    if let Some(k) = args.folds {
        cfg.folds = k;
    }
    if let Some(g) = &args.grid {
        cfg.grid = g.clone();
    }
    if let Some(r) = args.ridge {
        cfg.ridge = r;
    }
    if let Some(f) = &args.features {
        cfg.features = Some(f.clone());
    }
    cfg.full_curve |= args.full_curve;
    cfg.reverse_kl |= args.reverse_kl;
    Ok(cfg)
}

fn run(args: RunArgs) -> carmen::Result<()> {
    let started = Instant::now();
    let cfg = build_config(&args)?;
    let result = run_scenario(&cfg)?;
    let (summary, curve) = emit_outputs(&result, &args.out)?;
    let s = &result.star;
    println!(
        "{}: t*={:.4e}{} logZ_sum={:.4} p={:.4e}",
        cfg.scenario,
        s.t,
        if s.at_boundary { " (grid boundary)" } else { "" },
        s.logz_approx_sum,
        s.p_value
    );
    println!("wrote {} and {}", summary.display(), curve.display());
    if cfg.full_curve {
        eprintln!("note: grid-wise p-values are diagnostic only; decide on the value at t*");
    }
    eprintln!("elapsed {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::List => {
            for name in ScenarioName::ALL {
                println!("{:<18} {}", name.as_str(), name.describe());
            }
            Ok(())
        }
        Command::Run(args) => run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
