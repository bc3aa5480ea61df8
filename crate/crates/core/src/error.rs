use thiserror::Error;

/// Toolkit-wide error type.
#[derive(Debug, Error)]
pub enum LgError {
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("trajectory escaped the working region at t = {escape_time}")]
    Escaped { escape_time: f64 },
    #[error("point outside chart (distance {distance:.3e} > radius {radius:.3e})")]
    OutOfChart { distance: f64, radius: f64 },
    #[error("Newton did not converge: {0}")]
    NewtonStagnation(String),
    #[error("non-Morse critical point: {0}")]
    NonMorse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LgError>;
