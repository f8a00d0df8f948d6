use thiserror::Error;

/// Failures surfaced by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("quadrature did not converge: error estimate {error:.3e} above tolerance {tolerance:.3e} after {subdivisions} subdivisions (estimate log|I| = {log_estimate:.6})")]
    NonConvergence {
        error: f64,
        tolerance: f64,
        subdivisions: usize,
        log_estimate: f64,
    },
    #[error("angular sampling looks aliased: trailing modes carry {ratio:.3e} of the energy")]
    AliasingSuspected { ratio: f64 },
    #[error("band truncation at width {bandwidth} discards relative mass {discarded:.3e}")]
    BandwidthExceeded { bandwidth: usize, discarded: f64 },
    #[error("Gram matrix is not positive definite: pivot {pivot:.3e} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("tensor power {m} exceeds the degree cap {cap} of model `{model}`")]
    DegreeCap { model: String, m: usize, cap: usize },
    #[error("model construction failed: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("the section f_0 vanishes at the base point {re}+{im}i")]
    VanishingSection { re: f64, im: f64 },
    #[error("perturbative and direct gradients disagree: {perturbative:.6e} vs {direct:.6e} (allowed {allowed:.3e})")]
    PathDisagreement {
        perturbative: f64,
        direct: f64,
        allowed: f64,
    },
    #[error("finite-difference step too coarse at r = {r}: truncation estimate {estimate:.3e}")]
    StepTooCoarse { r: f64, estimate: f64 },
}

pub type Result<T> = std::result::Result<T, LabError>;
