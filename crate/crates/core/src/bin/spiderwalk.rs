use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spiderwalk::experiment::{run_experiment, run_selftest, write_report, ExperimentConfig, ExperimentKind};
use spiderwalk::Error;

/// Spider random walk experiments.
#[derive(Parser)]
#[command(name = "spiderwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Also write per-replication samples.
        #[arg(long)]
        emit_samples: bool,
    },
    /// Print the experiment catalog.
    List,
    /// Run the sampler and closed-form self-checks.
    Selftest,
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for kind in ExperimentKind::ALL {
                println!("{:<18} {}", kind.name(), kind.anchor());
                println!("{:<18} {}", "", kind.description());
            }
            ExitCode::SUCCESS
        }
        Command::Selftest => match run_selftest() {
            Ok(results) => {
                for r in &results {
                    println!("{r}");
                }
                let failed = results.iter().filter(|r| !r.passed).count();
                println!("{} checks, {failed} failed", results.len());
                if failed == 0 {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_FAIL)
                }
            }
            Err(e) => {
                eprintln!("selftest: {e}");
                ExitCode::from(EXIT_FAIL)
            }
        },
        Command::Run {
            experiment,
            config,
            seed,
            threads,
            emit_samples,
        } => run(experiment, config, seed, threads, emit_samples),
    }
}

fn run(experiment: String, path: PathBuf, seed: Option<u64>, threads: Option<usize>, emit: bool) -> ExitCode {
    let mut config = match ExperimentConfig::from_file(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if config.experiment != experiment {
        eprintln!(
            "config error: --experiment {experiment} but {} names '{}'",
            path.display(),
            config.experiment
        );
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(t) = threads {
        config.threads = t;
    }
    config.emit_samples |= emit;
    let report = match run_experiment(&config) {
        Ok(r) => r,
        Err(e @ (Error::Config(_) | Error::InvalidArgument(_))) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    };
    let dir = config
        .output_path
        .clone()
        .unwrap_or_else(|| PathBuf::from("spiderwalk-out").join(&config.experiment));
    match write_report(&report, &dir) {
        Ok(files) => {
            print!("{}", report.summary_text());
            println!("\nwrote {}", files.summary.display());
            println!("wrote {}", files.structured.display());
            if let Some(s) = files.samples {
                println!("wrote {}", s.display());
            }
        }
        Err(e) => {
            eprintln!("output error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
