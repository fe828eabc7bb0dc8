use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid configuration value or inconsistent parameter set.
    #[error("configuration error: {0}")]
    Config(String),

    /// Operator/state dimensions do not agree.
    #[error("shape mismatch: expected dimension {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    /// A normal-mode frequency became imaginary.
    #[error("unstable parameters at delta = {delta}: {reason}")]
    Stability { delta: f64, reason: String },

    /// Argument outside the domain of a function (time outside a stroke, empty ensemble, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Numerical failure of a stochastic or deterministic integrator.
    #[error("integrator error: {0}")]
    Integrator(String),
}

impl Error {
    /// Prefix an integrator error with the stroke and time at which it happened.
    pub fn in_stroke(self, stroke: usize, t: f64) -> Self {
        match self {
            Error::Integrator(msg) => Error::Integrator(format!("stroke {stroke}, t = {t:.4}: {msg}")),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
