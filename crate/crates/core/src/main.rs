use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use gausspsl::harness::{self, verify, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "gausspsl",
    version,
    about = "Gaussian-partitioned Pareto set learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full problem x scalarizer x model x seed suite.
    Run(Common),
    /// Fixed subspace counts with densification off, plus a densifying arm.
    AblateSubspaces(Common),
    /// Entropy weight sweep.
    AblateGamma(Common),
    /// Generate and cache the reference fronts of the configured problems.
    ReferenceFronts(Common),
    /// Run the built-in oracle checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the default configuration as TOML.
    DefaultConfig,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Run(c) => {
            let cfg = c.load()?;
            let result = harness::run_suite(&cfg, c.jobs)?;
            for row in &result.summary.rows {
                println!(
                    "{:<6} {:<9} {:<6} {:>9.4} ({:.4}) n={} {}",
                    row.problem.to_string(),
                    row.model.to_string(),
                    row.scalarizer.to_string(),
                    row.mean_lhd,
                    row.std_lhd,
                    row.n_runs,
                    row.flags
                );
            }
            if !result.failures.is_empty() {
                log::warn!("{} runs failed, see failures.json", result.failures.len());
            }
            println!(
                "summary written to {}",
                cfg.output_dir.join("summary.csv").display()
            );
            Ok(true)
        }
        Command::AblateSubspaces(c) => {
            let cfg = c.load()?;
            let ab = harness::run_ablation_subspaces(&cfg, c.jobs)?;
            for arm in &ab.arms {
                println!(
                    "{:<8} median lhd {:.4} n={}",
                    arm.label,
                    arm.median_lhd(),
                    arm.records.len()
                );
            }
            Ok(true)
        }
        Command::AblateGamma(c) => {
            let cfg = c.load()?;
            let ab = harness::run_ablation_gamma(&cfg, c.jobs)?;
            for arm in &ab.arms {
                let l = arm.final_lhds();
                println!(
                    "gamma {:<6} median lhd {:.4} std {:.4} n={}",
                    arm.gamma,
                    harness::median(&l),
                    harness::sample_std(&l),
                    l.len()
                );
            }
            Ok(true)
        }
        Command::ReferenceFronts(c) => {
            let cfg = c.load()?;
            let evals = harness::load_evaluations(&cfg, &cfg.problems)?;
            for (id, (_, e)) in &evals {
                println!(
                    "{:<6} {:>6} points  hv* {:.6}  reference {:?}",
                    id.to_string(),
                    e.reference_front.len(),
                    e.hv_star,
                    e.hv.reference
                );
            }
            Ok(true)
        }
        Command::Verify { seed } => {
            let checks = verify::run_all(seed)?;
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::DefaultConfig => {
            print!("{}", ExperimentConfig::default().to_toml()?);
            Ok(true)
        }
    }
}
