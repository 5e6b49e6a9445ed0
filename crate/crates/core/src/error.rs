use thiserror::Error;

use crate::lyapunov::ExponentEstimate;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("smoothness: {0}")]
    Smoothness(String),

    #[error("configuration: {0}")]
    Config(String),

    /// A derivative vanished on the orbit inside the estimation window. The
    /// carried estimate reports both exponents as `-inf`.
    #[error("zero derivative on the orbit at step {step}; exponent is -inf")]
    Sentinel {
        step: usize,
        estimate: Box<ExponentEstimate>,
    },

    #[error("negative input: {0}")]
    NegativeInput(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("precondition: {0}")]
    Precondition(String),

    #[error("range: {0}")]
    Range(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("map f_{n} sends {x} to {image}, outside the domain")]
    SelfMap { n: u64, x: f64, image: f64 },

    #[error("parameter value {value} is outside {allowed}")]
    ParamRange { value: f64, allowed: &'static str },

    #[error("derivative of f_{n} at {x} disagrees with finite difference ({closed} vs {numeric})")]
    DerivativeMismatch { n: u64, x: f64, closed: f64, numeric: f64 },
}
