//! Configuration-driven experiments: config files, the parallel runner and
//! the on-disk report.

mod config;
mod emit;
mod tasks;

use std::time::Instant;

pub use config::{canonical_hash, Domains, ExperimentConfig, Format, Grids, Kind, Output, Overrides, CONFIG_VERSION};
pub use emit::{emit, Artifact, Cell, Check, RunRecord, Table, FAILED_MARKER};

use crate::{Error, Result};

/// Runs `cfg` on a pool with `cfg.threads` workers (all cores when unset).
/// Errors at individual grid points land in `failures`; configuration and
/// pool errors are returned.
pub fn run(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Config(vec![format!("thread pool: {e}")]))?;
    let outcome = pool.install(|| tasks::run_kind(cfg));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e @ (Error::Config(_) | Error::InvalidDomain(_) | Error::DimensionMismatch { .. })) => return Err(e),
        Err(e) => tasks::Outcome { failures: vec![e.to_string()], ..Default::default() },
    };
    Ok(RunRecord {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        toolkit_version: env!("CARGO_PKG_VERSION").into(),
        wall_time: start.elapsed().as_secs_f64(),
        tables: outcome.tables,
        checks: outcome.checks,
        warnings: outcome.warnings,
        failures: outcome.failures,
        artifacts: outcome.artifacts,
    })
}

/// [`run`] followed by [`emit`] into `cfg.output.dir`.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let record = run(cfg)?;
    emit(&record, cfg.output.format, &cfg.output.dir)?;
    Ok(record)
}
