use thiserror::Error;

/// Errors raised by the geometric and dynamical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VortexError {
    #[error("map is not conformal at z = {re} + {im}i (|phi'| = {modulus:e})")]
    SingularMap { re: f64, im: f64, modulus: f64 },
    #[error("metric density must be positive, got {0}")]
    InvalidMetric(f64),
    #[error("point outside atlas: chart {chart}, z = {re} + {im}i")]
    OutsideAtlas { chart: u8, re: f64, im: f64 },
    #[error("coincident points (separation {0:e})")]
    Coincident(f64),
    #[error("{what} did not converge")]
    NonConvergence { what: &'static str },
    #[error("step failure: {0}")]
    StepFailure(String),
    #[error("vanishing velocity at sample {0}")]
    VanishingVelocity(usize),
    #[error("near collision between vortices {i} and {j} (separation {separation:e})")]
    NearCollision { i: usize, j: usize, separation: f64 },
    #[error("vortex {index} lies within {clearance:e} of a homology cycle")]
    VortexOnCycle { index: usize, clearance: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = VortexError> = std::result::Result<T, E>;
