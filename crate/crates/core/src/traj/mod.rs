//! Stochastic integrators for single quantum trajectories.
//!
//! A trajectory step is split into independent pieces that act in place on
//! a state vector:
//!
//! * [`unitary`] – the Hamiltonian part, `exp(-i H(t + dt/2) dt)`;
//! * [`sse`] – diffusive (Euler–Maruyama) measurement back-action;
//! * [`jumps`] – quantum jumps for the cavity and mechanical baths;
//! * [`waiting`] – an exact-waiting-time jump propagator for stretches
//!   where the Hamiltonian is constant and nothing is monitored.
//!
//! [`rng`] supplies per-trajectory random streams that depend only on the
//! master seed and the trajectory index.

pub mod jumps;
pub mod rng;
pub mod sse;
pub mod unitary;
pub mod waiting;

pub use jumps::{jump_step_baths, BathChannels, Channel, JumpOutcome};
pub use rng::{RngStream, StreamKind};
pub use sse::{sse_step_absorptive, sse_step_dispersive, SseScratch};
pub use unitary::{hamiltonian_step, TaylorPropagator};
pub use waiting::{ConstantPropagator, WaitingScratch};

use crate::{Error, Result};

/// Which observable, if any, is continuously monitored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    None,
    /// Homodyne-type readout of the cavity field; removes photons.
    Absorptive,
    /// Quantum non-demolition readout of the photon number.
    Dispersive,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::Absorptive => "absorptive",
            Scheme::Dispersive => "dispersive",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Scheme::None),
            "absorptive" => Ok(Scheme::Absorptive),
            "dispersive" => Ok(Scheme::Dispersive),
            other => Err(Error::Config(format!(
                "unknown measurement scheme '{other}' (expected none, absorptive or dispersive)"
            ))),
        }
    }
}

/// Measurement scheme and its strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementConfig {
    pub scheme: Scheme,
    /// Measurement rate in units of `omega_m`. Ignored for [`Scheme::None`].
    pub lambda: f64,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::None,
            lambda: 0.0,
        }
    }
}

impl MeasurementConfig {
    pub fn new(scheme: Scheme, lambda: f64) -> Result<Self> {
        let m = Self { scheme, lambda };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "meas.lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Rate actually applied to the state; zero when nothing is measured.
    pub fn effective_lambda(&self) -> f64 {
        match self.scheme {
            Scheme::None => 0.0,
            _ => self.lambda,
        }
    }

    pub fn is_active(&self) -> bool {
        self.effective_lambda() > 0.0
    }
}

/// Time step, master seed and normalization policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub seed: u64,
    pub renorm_every_step: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            seed: 1,
            renorm_every_step: true,
        }
    }
}

impl StepperConfig {
    /// Check the step against the fastest frequency and the measurement rate.
    pub fn validate(&self, max_frequency: f64, lambda: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("stepper.dt must be positive, got {}", self.dt)));
        }
        if self.dt * lambda > 0.01 {
            return Err(Error::Config(format!(
                "stepper.dt * meas.lambda = {:.3e} exceeds 0.01",
                self.dt * lambda
            )));
        }
        if self.dt * max_frequency > 0.05 {
            return Err(Error::Config(format!(
                "stepper.dt * omega_A,max = {:.3e} exceeds 0.05",
                self.dt * max_frequency
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_round_trips_through_names() {
        for s in [Scheme::None, Scheme::Absorptive, Scheme::Dispersive] {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("homodyne".parse::<Scheme>().is_err());
    }

    #[test]
    fn none_scheme_ignores_lambda() {
        let m = MeasurementConfig::new(Scheme::None, 3.0).unwrap();
        assert_eq!(m.effective_lambda(), 0.0);
        assert!(!m.is_active());
        assert!(MeasurementConfig::new(Scheme::Dispersive, -0.1).is_err());
    }

    #[test]
    fn stepper_limits() {
        let s = StepperConfig::default();
        assert!(s.validate(3.01, 0.04).is_ok());
        assert!(s.validate(11.0, 0.0).is_err());
        assert!(s.validate(3.0, 2.5).is_err());
        let bad = StepperConfig { dt: 0.0, ..s };
        assert!(bad.validate(1.0, 0.0).is_err());
    }
}
