//! `sslo`: runs one experiment kind from a JSON config and writes its report.
//!
//! Exit status is 0 when every check passes, 2 when a verification fails and
//! 1 on errors, including grid points that could not be computed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sslo::bounds::LogBase;
use sslo::experiments::{execute, ExperimentConfig, Format, Kind, Overrides};

#[derive(Parser)]
#[command(name = "sslo", version, about = "Spatio-spectral limiting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, counts and inequality checks for each spatial domain.
    Spectrum(Flags),
    /// Dyadic cover of each domain with its condition report and JSON export.
    Cover(Flags),
    /// Counts of T_{F, rS} over a grid of dilation factors.
    ScanDilation(Flags),
    /// One-dimensional counts against the explicit and asymptotic bounds.
    #[command(name = "verify-1d")]
    Verify1d(Flags),
    /// Cover condition report over a grid of scales.
    VerifyCover(Flags),
    /// Distribution bounds against computed counts, fitted constants and windows.
    VerifyBounds(Flags),
    /// Plunge-region count of a domain against its decomposition.
    Synthesis(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON config; omitted keys take the defaults of the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format: csv or json.
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Logarithm for the one-dimensional bounds: natural or base2.
    #[arg(long)]
    log_base: Option<LogBase>,
}

impl Command {
    fn split(self) -> (Kind, Flags) {
        match self {
            Command::Spectrum(f) => (Kind::Spectrum, f),
            Command::Cover(f) => (Kind::Cover, f),
            Command::ScanDilation(f) => (Kind::ScanDilation, f),
            Command::Verify1d(f) => (Kind::Verify1d, f),
            Command::VerifyCover(f) => (Kind::VerifyCover, f),
            Command::VerifyBounds(f) => (Kind::VerifyBounds, f),
            Command::Synthesis(f) => (Kind::Synthesis, f),
        }
    }
}

fn main() -> ExitCode {
    let (kind, flags) = Cli::parse().command.split();
    let mut cfg = match &flags.config {
        Some(path) => match ExperimentConfig::load(kind, path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => ExperimentConfig::defaults(kind),
    };
    cfg.apply(&Overrides {
        out: flags.out,
        format: flags.format,
        threads: flags.threads,
        seed: flags.seed,
        log_base: flags.log_base,
    });
    let record = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    for f in &record.failures {
        eprintln!("failed: {f}");
    }
    for c in &record.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!(
        "{} checks, {} failed; outputs in {} (config {})",
        record.checks.len(),
        record.checks.iter().filter(|c| !c.pass).count(),
        cfg.output.dir.display(),
        &record.config_hash[..12]
    );
    if !record.failures.is_empty() {
        ExitCode::from(1)
    } else if record.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
