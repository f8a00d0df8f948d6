//! Command-line front end for the Bergman metric lab.

pub mod config;
pub mod error;
pub mod report;
pub mod reproduce;
pub mod schema;
pub mod suites;

use config::{Command, RunConfig};
use error::{exit, RunError};
use std::path::PathBuf;

/// Result of one verb: reports and the files they produced.
pub struct Outcome {
    pub reports: Vec<report::Report>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed())
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            exit::PASS
        } else {
            exit::SUITE_FAILURE
        }
    }
}

/// Resolves `cfg` for `command`, runs it and writes all artifacts.
pub fn run(command: Command, cfg: RunConfig) -> Result<Outcome, RunError> {
    let cfg = cfg.resolve(command)?;
    cfg.prepare_output()?;
    let reports = suites::run_command(command, &cfg)?;
    let mut files = Vec::new();
    for r in &reports {
        // `all` runs sub-suites whose configs differ; each JSON echoes its own.
        let echo = if command == Command::All {
            let base = RunConfig {
                cusp: r.suite == "families_cusp",
                ..cfg.defaults_only()
            };
            base.resolve(suite_command(r.suite))?
        } else {
            cfg.clone()
        };
        files.extend(r.write(&echo)?);
    }
    Ok(Outcome { reports, files })
}

fn suite_command(suite: &str) -> Command {
    match suite {
        "models" => Command::Models,
        "rates" => Command::Rates,
        "peak" => Command::Peak,
        "fourier" => Command::Fourier,
        "sharp" => Command::Sharp,
        "families" | "families_cusp" => Command::Families,
        "oscillation" => Command::Oscillation,
        _ => Command::All,
    }
}
