use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ringchain::runner::{self, ProfileSpec, ScenarioConfig, PRESETS};

#[derive(Parser)]
#[command(
    name = "ringchain",
    version,
    about = "Harmonic chain on a circle: simulations and continuum checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a scenario file.
    Run {
        config: PathBuf,
        /// Output directory; falls back to the config, then RINGCHAIN_OUT.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent cells.
        #[arg(long)]
        jobs: Option<usize>,
        /// Replace the configured profile with a named preset.
        #[arg(long)]
        preset: Option<String>,
    },
    /// List the built-in profiles.
    Presets,
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path).with_context(|| format!("invalid scenario {}", path.display()))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Presets => {
            println!("{:<8} {:>10}  description", "name", "gamma");
            for p in PRESETS {
                println!(
                    "{:<8} {:>10.6}  {}",
                    p.name,
                    runner::reference_gamma(p.name)?,
                    p.description
                );
            }
            println!("gamma on L = 1 with alpha = 0, omega0 = 1 and C1 = C2 = 0 (midpoint sampling)");
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!("ok: {} with N = {:?}", cfg.experiment.as_str(), cfg.n_list);
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            out,
            jobs,
            preset,
        } => {
            let mut cfg = load(&config)?;
            if let Some(name) = preset {
                cfg.profile = ProfileSpec::Preset(name);
                cfg.validate()?;
            }
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .or_else(|| std::env::var_os("RINGCHAIN_OUT").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("ringchain_out"));
            let report = runner::run(&cfg, &dir, jobs)?;
            for a in &report.assertions {
                println!("{}", a.describe());
            }
            println!("report: {}", dir.join("report.json").display());
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                let failing: Vec<&str> = report.failures().map(|a| a.name.as_str()).collect();
                eprintln!("failed: {}", failing.join(", "));
                Ok(ExitCode::from(1))
            }
        }
    }
}
