//! Unitary micro-steps `ψ ← exp(-i H dt) ψ`.
//!
//! The exponential is applied by its Taylor series, summed until the next
//! term is below round-off. The series is taken for `H - E` with
//! `E = <ψ|H|ψ>` and the phase `exp(-i E dt)` restored afterwards; trajectory
//! states stay close to eigenstates, so the shifted series is short.
//! Evaluating `H` at the middle of the step gives the exponential-midpoint
//! rule, second order in `dt` for a time-dependent Hamiltonian.

use crate::qops::{norm_sqr, LinearMap, QOperator, QState};
use crate::{Error, Result, C64};

const MAX_TERMS: usize = 40;
const TOLERANCE: f64 = 1e-15;
const MAX_HALVINGS: u32 = 12;

/// Taylor-series propagator with reusable buffers.
#[derive(Debug, Clone)]
pub struct TaylorPropagator {
    term: Vec<C64>,
    scratch_term: Vec<C64>,
    next: Vec<C64>,
    acc: Vec<C64>,
}

impl TaylorPropagator {
    pub fn new(dim: usize) -> Self {
        let zero = vec![C64::new(0.0, 0.0); dim];
        Self {
            term: zero.clone(),
            scratch_term: zero.clone(),
            next: zero.clone(),
            acc: zero,
        }
    }

    /// `psi ← exp(-i h dt) psi`.
    pub fn step<L: LinearMap + ?Sized>(&mut self, psi: &mut [C64], h: &L, dt: f64) -> Result<()> {
        self.step_split(psi, h, dt, 0)
    }

    fn step_split<L: LinearMap + ?Sized>(
        &mut self,
        psi: &mut [C64],
        h: &L,
        dt: f64,
        depth: u32,
    ) -> Result<()> {
        if self.try_step(psi, h, dt) {
            return Ok(());
        }
        if depth >= MAX_HALVINGS {
            return Err(Error::Integrator(format!(
                "Taylor series of exp(-i H dt) did not converge for dt = {dt:e}"
            )));
        }
        self.step_split(psi, h, 0.5 * dt, depth + 1)?;
        self.step_split(psi, h, 0.5 * dt, depth + 1)
    }

    fn try_step<L: LinearMap + ?Sized>(&mut self, psi: &mut [C64], h: &L, dt: f64) -> bool {
        let norm2 = norm_sqr(psi);
        if norm2 == 0.0 {
            return true;
        }
        let scale = norm2.sqrt();
        h.apply_into(psi, &mut self.next);
        let energy = crate::qops::inner(psi, &self.next).re / norm2;
        self.acc.copy_from_slice(psi);
        let mut k = 1;
        loop {
            // term_k = (-i dt / k) (H - E) term_{k-1}; H term_{k-1} is in `next`.
            let factor = C64::new(0.0, -dt / k as f64);
            let mut size = 0.0;
            let source: &[C64] = if k == 1 { psi } else { &self.term };
            let mut fresh = std::mem::take(&mut self.scratch_term);
            fresh.resize(source.len(), C64::new(0.0, 0.0));
            for (((f, n), s), a) in fresh.iter_mut().zip(&self.next).zip(source).zip(self.acc.iter_mut()) {
                *f = (n - s * energy) * factor;
                *a += *f;
                size += f.norm_sqr();
            }
            std::mem::swap(&mut self.term, &mut fresh);
            self.scratch_term = fresh;
            let size = size.sqrt();
            // Growing terms mean cancellation would eat the precision.
            if size > 1e3 * scale {
                return false;
            }
            if size < TOLERANCE * scale {
                let phase = C64::from_polar(1.0, -energy * dt);
                for (p, a) in psi.iter_mut().zip(&self.acc) {
                    *p = a * phase;
                }
                return true;
            }
            if k == MAX_TERMS {
                return false;
            }
            k += 1;
            h.apply_into(&self.term, &mut self.next);
        }
    }
}

/// One unitary step of a state under `h`, which should be the Hamiltonian
/// at the midpoint of the step.
pub fn hamiltonian_step(state: &QState, h: &QOperator, dt: f64) -> Result<QState> {
    if state.dims() != h.dims() {
        return Err(Error::Shape {
            expected: h.dims().dim(),
            found: state.dims().dim(),
        });
    }
    let mut psi = state.as_slice().to_vec();
    TaylorPropagator::new(psi.len()).step(&mut psi, h, dt)?;
    QState::new(state.dims(), psi.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{hamiltonian, ModelParams};
    use crate::qops::{expectation, number_op, Mode, SpaceDims};
    use nalgebra::DVector;

    #[test]
    fn zero_hamiltonian_is_identity() {
        let d = SpaceDims::new(3, 3).unwrap();
        let v = DVector::from_fn(9, |i, _| C64::new(i as f64, 1.0));
        let s = QState::new(d, v).unwrap();
        let out = hamiltonian_step(&s, &QOperator::zeros(d), 0.1).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn decoupled_photon_picks_up_detuning_phase() {
        let d = SpaceDims::new(4, 3).unwrap();
        let p = ModelParams {
            coupling: 0.0,
            ..ModelParams::default()
        };
        let delta = -2.0;
        let h = hamiltonian(&p, delta, d);
        let n = number_op(d, Mode::Photon);
        let mut s = QState::fock(d, 1, 0).unwrap();
        let dt = 0.01;
        for _ in 0..500 {
            s = hamiltonian_step(&s, &h, dt).unwrap();
        }
        let amp = s.as_slice()[d.index(1, 0)];
        let expected = C64::from_polar(1.0, delta * 5.0);
        assert!((amp - expected).norm() < 1e-10, "{amp} vs {expected}");
        assert!((expectation(&s, &n).unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn large_steps_are_split_and_stay_unitary() {
        let d = SpaceDims::new(6, 6).unwrap();
        let h = hamiltonian(&ModelParams::default(), -3.0, d);
        let s = QState::fock(d, 5, 5).unwrap();
        let mut psi = s.as_slice().to_vec();
        TaylorPropagator::new(d.dim()).step(&mut psi, &h, 5.0).unwrap();
        assert!((norm_sqr(&psi) - 1.0).abs() < 1e-10);
    }
}
