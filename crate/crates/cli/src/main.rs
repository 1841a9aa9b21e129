mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::CliError;
use config::{InitialKind, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulation and stability analysis of wave equations with fractional damping.
///
/// Exit codes: 0 success, 1 bad config or input, 2 tolerance breach.
#[derive(Parser)]
#[command(name = "fracwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the diffusive quadrature and the closed-form integrals; writes kernel_report.csv.
    VerifyKernel(Common),
    /// Run the implicit-midpoint scheme; writes energy.csv.
    Simulate(Common),
    /// Scan the resolvent norm of the augmented and classical generators; writes resolvent.csv and growthfit.csv.
    Resolvent(Common),
    /// Simulate, fit decay laws and compare with the predicted law; writes decay.csv and energy.csv.
    Decay(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random initial states (initial.kind = "random").
    #[arg(long)]
    seed: Option<u64>,
}

fn load(c: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = match &c.config {
        Some(path) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&src, &path.display().to_string()).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = c.seed {
        if cfg.initial.kind == InitialKind::Random {
            cfg.initial.seed = seed;
        } else {
            eprintln!("note: --seed ignored, initial.kind is not \"random\"");
        }
    }
    if let Some(out) = &c.out {
        cfg.output.directory = out.display().to_string();
    }
    commands::resolve(&mut cfg)?;
    let dir = PathBuf::from(&cfg.output.directory);
    Ok((cfg, dir))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (common, f): (&Common, fn(&RunConfig, &std::path::Path) -> Result<Vec<String>, CliError>) = match &cli.command {
        Command::VerifyKernel(c) => (c, commands::verify_kernel),
        Command::Simulate(c) => (c, commands::simulate),
        Command::Resolvent(c) => (c, commands::resolvent),
        Command::Decay(c) => (c, commands::decay),
    };
    match load(common).and_then(|(cfg, dir)| f(&cfg, &dir)) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fracwave: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
