//! Quantum-jump unraveling of the cavity and mechanical baths.
//!
//! Jump operators: `√κ a` (cavity at zero temperature), `√(γ(n̄+1)) b` and
//! `√(γ n̄) b†` (mechanical bath at occupation `n̄`). All `C†C` are diagonal in
//! the Fock basis, so the effective decay `Γ = Σ C†C` is stored as a vector.

use super::rng::RngStream;
use crate::model::ModelParams;
use crate::qops::{norm_sqr, normalize, QState, SpaceDims};
use crate::{Error, Result, C64};

/// Upper bound on the jump probability of a single step.
pub const MAX_JUMP_PROBABILITY: f64 = 0.1;

/// Bath jump channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Photon leaks out of the cavity.
    CavityLoss,
    /// Phonon emitted into the mechanical bath.
    PhononLoss,
    /// Phonon absorbed from the mechanical bath.
    PhononGain,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::CavityLoss, Channel::PhononLoss, Channel::PhononGain];
}

/// Outcome of one bath step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpOutcome {
    NoJump,
    Jump(Channel),
}

/// Rates and diagonal `C†C` tables of the three bath channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BathChannels {
    dims: SpaceDims,
    rates: [f64; 3],
    /// `<i|C_k† C_k|i>` per channel (without the rate), basis order.
    occupations: [Vec<f64>; 3],
    /// `Σ_k rate_k <i|C_k† C_k|i>`.
    total: Vec<f64>,
}

impl BathChannels {
    pub fn new(dims: SpaceDims, kappa: f64, gamma: f64, nbar: f64) -> Self {
        let rates = [kappa, gamma * (nbar + 1.0), gamma * nbar];
        let top_b = dims.n_phonon() - 1;
        let mut occupations = [
            Vec::with_capacity(dims.dim()),
            Vec::with_capacity(dims.dim()),
            Vec::with_capacity(dims.dim()),
        ];
        for i in 0..dims.dim() {
            let (na, nb) = dims.levels(i);
            occupations[0].push(na as f64);
            occupations[1].push(nb as f64);
            // b b† vanishes on the top level of the truncated space.
            occupations[2].push(if nb < top_b { nb as f64 + 1.0 } else { 0.0 });
        }
        let total = (0..dims.dim())
            .map(|i| (0..3).map(|k| rates[k] * occupations[k][i]).sum())
            .collect();
        Self {
            dims,
            rates,
            occupations,
            total,
        }
    }

    pub fn from_params(params: &ModelParams, dims: SpaceDims) -> Self {
        Self::new(dims, params.kappa, params.gamma, params.nbar_th)
    }

    /// Baths switched off.
    pub fn none(dims: SpaceDims) -> Self {
        Self::new(dims, 0.0, 0.0, 0.0)
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn is_active(&self) -> bool {
        self.rates.iter().any(|&r| r > 0.0)
    }

    pub fn rate(&self, channel: Channel) -> f64 {
        self.rates[channel as usize]
    }

    /// Diagonal of `Σ_k C_k† C_k`.
    pub fn decay_diagonal(&self) -> &[f64] {
        &self.total
    }

    /// `<ψ|C_k† C_k|ψ>` for each channel, unnormalized.
    pub fn channel_weights(&self, psi: &[C64]) -> [f64; 3] {
        let mut w = [0.0; 3];
        for (k, wk) in w.iter_mut().enumerate() {
            if self.rates[k] > 0.0 {
                *wk = self.rates[k]
                    * psi
                        .iter()
                        .zip(&self.occupations[k])
                        .map(|(c, o)| c.norm_sqr() * o)
                        .sum::<f64>();
            }
        }
        w
    }

    /// Apply the (rate-free) jump operator of `channel` in place.
    pub fn apply_jump(&self, channel: Channel, psi: &mut [C64]) {
        let na = self.dims.n_photon();
        let nb = self.dims.n_phonon();
        let zero = C64::new(0.0, 0.0);
        match channel {
            Channel::CavityLoss => {
                for ia in 1..na {
                    let s = (ia as f64).sqrt();
                    for ib in 0..nb {
                        psi[(ia - 1) * nb + ib] = psi[ia * nb + ib] * s;
                    }
                }
                psi[(na - 1) * nb..].iter_mut().for_each(|c| *c = zero);
            }
            Channel::PhononLoss => {
                for row in psi.chunks_exact_mut(nb) {
                    for ib in 1..nb {
                        row[ib - 1] = row[ib] * (ib as f64).sqrt();
                    }
                    row[nb - 1] = zero;
                }
            }
            Channel::PhononGain => {
                for row in psi.chunks_exact_mut(nb) {
                    for ib in (1..nb).rev() {
                        row[ib] = row[ib - 1] * (ib as f64).sqrt();
                    }
                    row[0] = zero;
                }
            }
        }
    }

    /// One bath step in place: a jump with probability `dt Σ <C†C>`,
    /// otherwise the no-jump damping `exp(-dt Γ / 2)`.
    ///
    /// After a jump the state is normalized; after no jump it is left
    /// unnormalized so the caller decides when to renormalize.
    pub fn step_in_place(&self, psi: &mut [C64], dt: f64, rng: &mut RngStream) -> Result<JumpOutcome> {
        if !self.is_active() {
            return Ok(JumpOutcome::NoJump);
        }
        let norm2 = norm_sqr(psi);
        let weights = self.channel_weights(psi);
        let dp = dt * weights.iter().sum::<f64>() / norm2;
        if dp > MAX_JUMP_PROBABILITY {
            return Err(Error::Integrator(format!(
                "bath jump probability {dp:.3} per step exceeds {MAX_JUMP_PROBABILITY}; reduce stepper.dt"
            )));
        }
        let u = rng.uniform();
        if u < dp {
            let channel = Channel::ALL[rng.categorical(&weights)];
            self.apply_jump(channel, psi);
            normalize(psi);
            return Ok(JumpOutcome::Jump(channel));
        }
        for (c, g) in psi.iter_mut().zip(&self.total) {
            if *g != 0.0 {
                *c *= (-0.5 * dt * g).exp();
            }
        }
        Ok(JumpOutcome::NoJump)
    }
}

/// One renormalized bath step of a state.
pub fn jump_step_baths(
    state: &QState,
    params: &ModelParams,
    dt: f64,
    rng: &mut RngStream,
) -> Result<(QState, JumpOutcome)> {
    let channels = BathChannels::from_params(params, state.dims());
    let mut psi = state.as_slice().to_vec();
    let outcome = channels.step_in_place(&mut psi, dt, rng)?;
    Ok((QState::new(state.dims(), psi.into())?, outcome))
}
