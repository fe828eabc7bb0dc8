//! Quantum-trajectory simulator for the linearized optomechanical Otto engine
//! under continuous photon-number monitoring.
//!
//! Units: `hbar = 1` and all frequencies, rates, energies and times are
//! expressed in units of the mechanical frequency `omega_m`.
//!
//! The crate is organised bottom-up:
//!
//! * [`qops`] – truncated two-mode Fock space, operators and states.
//! * [`model`] – the swept Hamiltonian, normal modes (polaritons) and the
//!   detuning schedule.
//! * [`traj`] – stochastic integrators (diffusive measurement unravelings,
//!   quantum jumps for the baths, unitary stepping) and random streams.
//! * [`master`] – deterministic density-matrix integration of the averaged
//!   dynamics, used as the reference for the trajectory ensembles.
//! * [`engine`] – the four-stroke cycle, work/heat bookkeeping and ensemble
//!   statistics.

pub mod engine;
pub mod error;
pub mod master;
pub mod model;
pub mod qops;
pub mod traj;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
