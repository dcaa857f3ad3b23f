use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phspec_core::harness::{self, Experiment};
use phspec_core::{ComparisonReport, RunConfig};

#[derive(Parser)]
#[command(name = "phspec", version, about = "Monte Carlo and large-N theory for pseudo-hermitian random matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the ensemble, write spectra and moment statistics.
    Sample(Overrides),
    /// Write closed-form curves for the configured signature metric.
    Theory(Overrides),
    /// Run the experiment named in the config.
    Compare(Overrides),
    /// Solve the gap equations on a grid of w.
    GapSolve(Overrides),
    /// Run the finite-N identity and averaged gap equation checks.
    Verify(Overrides),
    /// Real eigenvalue fraction over a list of λ.
    Sweep(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Overrides {
    fn resolve(&self) -> phspec_core::Result<RunConfig> {
        let mut config = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.ensemble.master_seed = seed;
        }
        if let Some(samples) = self.samples {
            config.ensemble.num_samples = samples;
        }
        if let Some(dir) = &self.out_dir {
            config.out_dir = dir.clone();
        }
        if self.threads.is_some() {
            config.threads = self.threads;
        }
        Ok(config)
    }
}

fn print_report(report: &ComparisonReport) {
    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {:<40} residual {:<12.4e} tolerance {:.4e}", c.check_name, c.residual, c.tolerance);
    }
    for (reason, count) in &report.skipped {
        println!("skipped {reason}: {count}");
    }
    println!("runtime {:.2}s", report.runtime_seconds);
}

fn execute(command: Command) -> phspec_core::Result<bool> {
    let (overrides, forced) = match &command {
        Command::Sample(o) => (o, Some(Experiment::SampleStatistics)),
        Command::Theory(o) => (o, None),
        Command::Compare(o) => (o, None),
        Command::GapSolve(o) => (o, Some(Experiment::GapGrid)),
        Command::Verify(o) => (o, Some(Experiment::Verify)),
        Command::Sweep(o) => (o, Some(Experiment::RealFractionSweep)),
    };
    let mut config = overrides.resolve()?;
    if let Command::Theory(_) = command {
        config.ensemble.validate()?;
        let summary = harness::write_theory(&config)?;
        println!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(true);
    }
    if let Some(experiment) = forced {
        config.experiment = experiment;
    }
    if let Command::Sample(_) = command {
        config.params.write_spectra = true;
    }
    let report = harness::run(&config)?;
    print_report(&report);
    println!("report written to {}", config.out_dir.join("report.json").display());
    Ok(report.pass())
}

fn main() -> ExitCode {
    env_logger::init();
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
