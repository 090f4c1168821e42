//! Named, reproducible experiments with machine-readable reports.
//!
//! Replication `r` of a run draws from `SeedSpec::new(seed).derive_stream(r)`
//! and results are merged in replication order, so a report depends only on
//! its config, whatever the number of threads.

pub mod catalog;
pub mod config;
pub mod report;
pub mod selftest;

use std::time::Instant;

use crate::error::{Error, Result};

pub use catalog::{ExperimentKind, StatisticSamples};
pub use config::ExperimentConfig;
pub use report::{write_report, ExperimentReport, ReportFiles, StatisticSummary, Timing};
pub use selftest::run_selftest;

/// Validates the config, then runs the experiment on a pool of
/// `config.threads` workers.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let kind = config.kind()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let output = pool.install(|| kind.run(config))?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let statistics = output
        .samples
        .iter()
        .map(StatisticSummary::from_samples)
        .collect::<Result<Vec<_>>>()?;
    let passed = output.tests.iter().all(|t| t.passed);
    Ok(ExperimentReport {
        experiment: kind.name().to_string(),
        anchor: kind.anchor().to_string(),
        config: config.clone(),
        statistics,
        tests: output.tests,
        details: output.details,
        passed,
        timing: Timing {
            wall_seconds,
            replications_per_second: config.replications as f64 / wall_seconds.max(1e-9),
        },
        samples: output.samples,
    })
}
