use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use weylherm::config::{Experiment, ExperimentConfig};
use weylherm::experiments::run_experiment;

const KEYS_HELP: &str = "\
Config files hold `section.key = value` lines; `#` starts a comment.
Required keys:
  simulate     potential.kind, basis.n_modes, evolution.hbar (von_neumann)
  converge     potential.kind, evolution.hbar
  hbar-sweep   potential.kind, basis.n_modes, sweep.hbar_list
  periodicity  potential.kind = harmonic, basis.n_modes, evolution.hbar";

#[derive(Parser)]
#[command(name = "weylherm", version, about = "Hermite spectral solver for the von Neumann equation in Weyl variables")]
#[command(after_help = KEYS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Publication resolution: Nx from Δx = 1e-3, dt = 1e-4, reference N = 500.
    #[arg(long)]
    full_scale: bool,
    /// Overrides output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Single run with a diagnostics time series.
    Simulate(Common),
    /// Error against a high-N reference for each N of the mode list.
    Converge(Common),
    /// von Neumann vs semiclassical difference over a list of ħ.
    HbarSweep(Common),
    /// Return error of the harmonic oscillator after one period.
    Periodicity(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (exp, common) = match cli.command {
        Command::Simulate(c) => (Experiment::Simulate, c),
        Command::Converge(c) => (Experiment::Converge, c),
        Command::HbarSweep(c) => (Experiment::HbarSweep, c),
        Command::Periodicity(c) => (Experiment::Periodicity, c),
    };
    let mut cfg = match ExperimentConfig::load(&common.config, Some(exp)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", common.config.display());
            return ExitCode::from(2);
        }
    };
    if common.full_scale {
        cfg.apply_full_scale();
    }
    if let Some(out) = common.out {
        cfg.output_dir = out;
    }
    match run_experiment(&cfg) {
        Ok(art) => {
            for f in &art.files {
                println!("{}  {}", f.sha256, f.path.display());
            }
            if let Some(p) = art.summary_path {
                println!("summary: {}", p.display());
            }
            println!("{}", serde_json::to_string_pretty(&art.summary["results"]).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
