//! Diffusive measurement unravelings (Euler–Maruyama).
//!
//! Dispersive (photon-number) readout:
//! `dψ = [-λ/2 (n - <n>)² dt + √λ (n - <n>) dw] ψ`.
//!
//! Absorptive (field) readout, with `x = <a + a†>`:
//! `dψ = [-λ/2 (a†a - x a + x²/4) dt + √λ (a - x/2) dw] ψ`.
//!
//! Expectations are taken on the input vector divided by its squared norm, so
//! the in-place kernels also work when renormalization is deferred.

use crate::qops::{inner, norm_sqr, LinearMap, QOperator, QState};
use crate::{Error, Result, C64};

const COLLAPSE_NORM: f64 = 1e-8;

/// Work buffers for the in-place kernels.
#[derive(Debug, Clone)]
pub struct SseScratch {
    first: Vec<C64>,
    second: Vec<C64>,
}

impl SseScratch {
    pub fn new(dim: usize) -> Self {
        Self {
            first: vec![C64::new(0.0, 0.0); dim],
            second: vec![C64::new(0.0, 0.0); dim],
        }
    }
}

fn check_collapse(before: f64, psi: &[C64]) -> Result<()> {
    let after = norm_sqr(psi).sqrt();
    if !(after >= COLLAPSE_NORM * before) {
        return Err(Error::Integrator(format!(
            "state norm collapsed to {:.3e} in a measurement step; reduce stepper.dt",
            after / before
        )));
    }
    Ok(())
}

/// In-place dispersive step. `number` must be the photon-number operator
/// (any Hermitian observable works).
pub fn dispersive_in_place<L: LinearMap + ?Sized>(
    psi: &mut [C64],
    number: &L,
    lambda: f64,
    dt: f64,
    dw: f64,
    scratch: &mut SseScratch,
) -> Result<()> {
    if lambda == 0.0 {
        return Ok(());
    }
    let norm2 = norm_sqr(psi);
    let (first, second) = (&mut scratch.first, &mut scratch.second);
    number.apply_into(psi, first);
    let mean = inner(psi, first).re / norm2;
    for (f, p) in first.iter_mut().zip(psi.iter()) {
        *f -= p * mean;
    }
    number.apply_into(first, second);
    let drift = -0.5 * lambda * dt;
    let kick = lambda.sqrt() * dw;
    for ((p, f), s) in psi.iter_mut().zip(first.iter()).zip(second.iter()) {
        let centred_sq = s - f * mean;
        *p += centred_sq * drift + f * kick;
    }
    check_collapse(norm2.sqrt(), psi)
}

/// In-place absorptive step. `a` is the photon annihilation operator.
pub fn absorptive_in_place(
    psi: &mut [C64],
    a: &QOperator,
    lambda: f64,
    dt: f64,
    dw: f64,
    scratch: &mut SseScratch,
) -> Result<()> {
    if lambda == 0.0 {
        return Ok(());
    }
    let norm2 = norm_sqr(psi);
    let (first, second) = (&mut scratch.first, &mut scratch.second);
    a.apply_into(psi, first);
    let x = 2.0 * inner(psi, first).re / norm2;
    a.apply_adjoint_into(first, second);
    let drift = -0.5 * lambda * dt;
    let kick = lambda.sqrt() * dw;
    for ((p, f), s) in psi.iter_mut().zip(first.iter()).zip(second.iter()) {
        let drift_vec = s - f * x + *p * (0.25 * x * x);
        let kick_vec = f - *p * (0.5 * x);
        *p += drift_vec * drift + kick_vec * kick;
    }
    check_collapse(norm2.sqrt(), psi)
}

fn to_state(state: &QState, op: &QOperator) -> Result<Vec<C64>> {
    if state.dims() != op.dims() {
        return Err(Error::Shape {
            expected: op.dims().dim(),
            found: state.dims().dim(),
        });
    }
    Ok(state.as_slice().to_vec())
}

/// One renormalized dispersive step of a state.
pub fn sse_step_dispersive(
    state: &QState,
    n_op: &QOperator,
    lambda_d: f64,
    dt: f64,
    dw: f64,
) -> Result<QState> {
    let mut psi = to_state(state, n_op)?;
    let mut scratch = SseScratch::new(psi.len());
    dispersive_in_place(&mut psi, n_op, lambda_d, dt, dw, &mut scratch)?;
    QState::new(state.dims(), psi.into())
}

/// One renormalized absorptive step of a state.
pub fn sse_step_absorptive(
    state: &QState,
    a_op: &QOperator,
    lambda_a: f64,
    dt: f64,
    dw: f64,
) -> Result<QState> {
    let mut psi = to_state(state, a_op)?;
    let mut scratch = SseScratch::new(psi.len());
    absorptive_in_place(&mut psi, a_op, lambda_a, dt, dw, &mut scratch)?;
    QState::new(state.dims(), psi.into())
}
