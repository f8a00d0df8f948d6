use bergman_lab::error::LabError;
use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const SUITE_FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Lab(LabError),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => exit::CONFIG,
            RunError::Io(_) => exit::CONFIG,
            RunError::Lab(e) => match e {
                LabError::InvalidModel(_) | LabError::InvalidArgument(_) | LabError::DegreeCap { .. } => {
                    exit::CONFIG
                }
                LabError::PathDisagreement { .. } => exit::SUITE_FAILURE,
                LabError::NonConvergence { .. }
                | LabError::AliasingSuspected { .. }
                | LabError::BandwidthExceeded { .. }
                | LabError::NotPositiveDefinite { .. }
                | LabError::VanishingSection { .. }
                | LabError::StepTooCoarse { .. } => exit::NON_CONVERGENCE,
            },
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(s) => write!(f, "config error: {s}"),
            RunError::Lab(e) => write!(f, "{e}"),
            RunError::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<LabError> for RunError {
    fn from(e: LabError) -> Self {
        RunError::Lab(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(e.to_string())
    }
}
