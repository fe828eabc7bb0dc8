//! Four-stroke Otto cycle: per-trajectory driver, work and heat bookkeeping,
//! and ensemble statistics.
//!
//! A [`CycleContext`] holds everything trajectories share (schedules, operators,
//! tabulated propagators, initial states); [`run_ensemble`] maps trajectories
//! over a worker pool and reduces the records in index order, so results do
//! not depend on the number of workers.

mod cycle;
mod prepare;
mod runner;
mod stats;

pub use cycle::{heat_bookkeeping, run_trajectory, work_increment, CycleContext, SeriesPoint, TrajectoryRecord};
pub use prepare::{
    sample_initial_state, thermal_distribution, InitialState, Preparation, PrepBasis, MAX_TAIL_MASS,
};
pub use runner::{default_workers, run_ensemble, run_ensemble_with, WORKERS_ENV};
pub use stats::{
    ensemble_statistics, CycleResult, EnsembleAccumulator, Histogram, HistogramSpec, PopulationCurves,
    WorkMoments,
};

use crate::model::{normal_mode_frequencies, ModelParams, ScheduleKind};
use crate::qops::SpaceDims;
use crate::traj::{MeasurementConfig, StepperConfig};
use crate::{Error, Result};

/// How the hot thermalization stroke is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stroke4Mode {
    /// Evolve with the baths for `t4`.
    Evolve,
    /// Replace the state by a fresh draw from the initial distribution.
    Resample,
}

impl Stroke4Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Stroke4Mode::Evolve => "evolve",
            Stroke4Mode::Resample => "resample",
        }
    }
}

impl std::str::FromStr for Stroke4Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evolve" => Ok(Stroke4Mode::Evolve),
            "resample" => Ok(Stroke4Mode::Resample),
            other => Err(Error::Config(format!(
                "unknown stroke-4 mode '{other}' (expected evolve or resample)"
            ))),
        }
    }
}

/// Which part of the cycle a trajectory runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleSpan {
    /// Only the first adiabatic stroke; no heat bookkeeping.
    FirstStroke,
    Full,
}

impl CycleSpan {
    pub fn name(&self) -> &'static str {
        match self {
            CycleSpan::FirstStroke => "first_stroke",
            CycleSpan::Full => "full",
        }
    }
}

impl std::str::FromStr for CycleSpan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first_stroke" => Ok(CycleSpan::FirstStroke),
            "full" => Ok(CycleSpan::Full),
            other => Err(Error::Config(format!(
                "unknown cycle span '{other}' (expected first_stroke or full)"
            ))),
        }
    }
}

/// Complete description of an ensemble run.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleConfig {
    pub params: ModelParams,
    pub dims: SpaceDims,
    pub meas: MeasurementConfig,
    pub stepper: StepperConfig,
    /// Durations of the four strokes.
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub n_traj: usize,
    pub stroke4_mode: Stroke4Mode,
    pub schedule_kind: ScheduleKind,
    pub span: CycleSpan,
    pub initial: InitialState,
    pub basis: PrepBasis,
    /// Bath jumps during the adiabatic strokes.
    pub adiabatic_damping: bool,
    /// Keep monitoring during the thermalization strokes.
    pub measure_all_strokes: bool,
    /// Recording interval in the adiabatic strokes.
    pub stride: f64,
    /// Recording interval in the thermalization strokes.
    pub thermal_stride: f64,
    pub hist: HistogramSpec,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            dims: SpaceDims::new(20, 20).expect("valid default cutoffs"),
            meas: MeasurementConfig::default(),
            stepper: StepperConfig::default(),
            t1: 40.0,
            t2: 400.0,
            t3: 40.0,
            t4: 4e4,
            n_traj: 20000,
            stroke4_mode: Stroke4Mode::Resample,
            schedule_kind: ScheduleKind::GapAdaptive,
            span: CycleSpan::Full,
            initial: InitialState::Thermal,
            basis: PrepBasis::Polariton,
            adiabatic_damping: true,
            measure_all_strokes: false,
            stride: 0.5,
            thermal_stride: 10.0,
            hist: HistogramSpec::default(),
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.meas.validate()?;
        let (omega_a, _) = normal_mode_frequencies(&self.params, self.params.delta_i)?;
        self.stepper.validate(omega_a, self.meas.effective_lambda())?;
        for (name, t) in [("cycle.t1", self.t1), ("cycle.t3", self.t3)] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {t}")));
            }
        }
        for (name, t) in [("cycle.t2", self.t2), ("cycle.t4", self.t4)] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("{name} must be non-negative, got {t}")));
            }
        }
        if self.n_traj == 0 {
            return Err(Error::Config("cycle.n_traj must be at least 1".into()));
        }
        for (name, s) in [("output.stride", self.stride), ("output.thermal_stride", self.thermal_stride)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {s}")));
            }
        }
        if let InitialState::Thermal = self.initial {
            thermal_distribution(self.params.nbar_th, self.dims.n_phonon())?;
        }
        if let InitialState::Fock(n) = self.initial {
            if n >= self.dims.n_phonon() {
                return Err(Error::Config(format!(
                    "initial Fock level {n} is outside the phonon cutoff {}",
                    self.dims.n_phonon()
                )));
            }
        }
        self.hist.validate()
    }

    /// Number of integration steps of a stroke of length `t`.
    pub fn steps(&self, t: f64) -> usize {
        if t <= 0.0 {
            0
        } else {
            ((t / self.stepper.dt).round() as usize).max(1)
        }
    }
}
