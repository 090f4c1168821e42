//! Runs a catalog experiment from a TOML config and writes its report,
//! the same path the `spiderwalk run` command takes.
//!
//!     cargo run --release --example run_experiment -- configs/excursion-pmf.toml

use std::path::PathBuf;

use spiderwalk::experiment::{run_experiment, write_report, ExperimentConfig, ExperimentKind};

fn main() -> spiderwalk::Result<()> {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::from_file(&PathBuf::from(path))?,
        None => {
            let mut c = ExperimentConfig::default_for(ExperimentKind::ExcursionPmf);
            c.replications = 100_000;
            c
        }
    };
    let report = run_experiment(&config)?;
    print!("{}", report.summary_text());
    let dir = std::env::temp_dir().join("spiderwalk-example").join(&report.experiment);
    let files = write_report(&report, &dir)?;
    println!("\nreport in {}", files.structured.display());
    Ok(())
}
