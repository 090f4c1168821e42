use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{Ecdf, MomentSummary, TestResult};

use super::catalog::StatisticSamples;
use super::config::ExperimentConfig;

/// Summary of one statistic over all replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// ECDF quantiles at 0.01, ..., 0.99.
    pub percentiles: Vec<f64>,
}

impl StatisticSummary {
    pub fn from_samples(s: &StatisticSamples) -> Result<Self> {
        let ecdf = Ecdf::new(&s.values)?;
        let (mean, variance, se_mean) = match MomentSummary::from_samples(&s.values) {
            Ok(m) => (m.mean, m.variance, m.se_mean),
            Err(_) => (s.values[0], 0.0, 0.0),
        };
        Ok(StatisticSummary {
            name: s.name.clone(),
            n: s.values.len(),
            mean,
            variance,
            se_mean,
            percentiles: ecdf.percentiles(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub replications_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub anchor: String,
    pub config: ExperimentConfig,
    pub statistics: Vec<StatisticSummary>,
    pub tests: Vec<TestResult>,
    pub details: BTreeMap<String, f64>,
    pub passed: bool,
    pub timing: Timing,
    /// Per-replication values; written to the samples file, never to the
    /// structured summary.
    #[serde(skip)]
    pub samples: Vec<StatisticSamples>,
}

/// Paths written by [`write_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub structured: PathBuf,
    pub samples: Option<PathBuf>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn failed_tests(&self) -> impl Iterator<Item = &TestResult> {
        self.tests.iter().filter(|t| !t.passed)
    }

    /// Plain-text summary.
    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "experiment   {}", self.experiment);
        let _ = writeln!(s, "checks       {}", self.anchor);
        let _ = writeln!(
            s,
            "config       seed={} replications={} walk_length={} leg_probs={:?} threads={}",
            c.seed, c.replications, c.walk_length, c.leg_probs, c.threads
        );
        let _ = writeln!(s, "verdict      {}", if self.passed { "PASS" } else { "FAIL" });
        let _ = writeln!(s, "\ntests");
        for t in &self.tests {
            let _ = writeln!(s, "  {t}");
        }
        let _ = writeln!(s, "\nstatistics");
        let _ = writeln!(
            s,
            "  {:<24} {:>9} {:>12} {:>12} {:>12} {:>12} {:>12}",
            "name", "n", "mean", "sd", "p01", "p50", "p99"
        );
        for st in &self.statistics {
            let _ = writeln!(
                s,
                "  {:<24} {:>9} {:>12.5} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
                st.name,
                st.n,
                st.mean,
                st.variance.sqrt(),
                st.percentiles[0],
                st.percentiles[49],
                st.percentiles[98]
            );
        }
        if !self.details.is_empty() {
            let _ = writeln!(s, "\ndetails");
            for (k, v) in &self.details {
                let _ = writeln!(s, "  {k:<40} {v:.6}");
            }
        }
        let _ = writeln!(
            s,
            "\nwall {:.2} s, {:.1} replications/s",
            self.timing.wall_seconds, self.timing.replications_per_second
        );
        s
    }

    /// Samples file, header `rep,statistic_name,value`, one row per
    /// replication and statistic.
    pub fn write_samples<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "rep,statistic_name,value")?;
        let reps = self.samples.iter().map(|s| s.values.len()).max().unwrap_or(0);
        for rep in 0..reps {
            for s in &self.samples {
                if let Some(v) = s.values.get(rep) {
                    writeln!(out, "{rep},{},{v}", s.name)?;
                }
            }
        }
        out.flush()
    }
}

/// Writes `summary.txt`, `report.json` and, when the config asks for
/// samples, `samples.csv` into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<ReportFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let summary = dir.join("summary.txt");
    fs::write(&summary, report.summary_text()).map_err(|e| Error::io(&summary, e))?;
    let structured = dir.join("report.json");
    fs::write(&structured, report.to_json()?).map_err(|e| Error::io(&structured, e))?;
    let samples = if report.config.emit_samples {
        let path = dir.join("samples.csv");
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        report.write_samples(file).map_err(|e| Error::io(&path, e))?;
        Some(path)
    } else {
        None
    };
    Ok(ReportFiles {
        summary,
        structured,
        samples,
    })
}
