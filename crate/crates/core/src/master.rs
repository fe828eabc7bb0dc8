//! Deterministic density-matrix evolution.
//!
//! Integrates `dρ/dt = -i[H(t), ρ] + Σ_k (L_k ρ L_k† - ½{L_k† L_k, ρ})` with
//! classical fourth-order Runge–Kutta. The collapse operators are the bath
//! channels and, for a monitored run, `√λ n` (dispersive) or `√λ a`
//! (absorptive): the ensemble average of the diffusive unravelings.
//! Intended for small spaces, as a reference for the trajectory ensembles.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::model::ModelParams;
use crate::qops::{annihilation, creation, number_op, Mode, QOperator, QState, SpaceDims};
use crate::traj::{MeasurementConfig, Scheme};
use crate::{Error, Result, C64};

pub type DensityMatrix = DMatrix<C64>;

/// Lindblad generator with a fixed set of collapse operators.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    dims: SpaceDims,
    collapse: Vec<DMatrix<C64>>,
    /// `Σ L†L`.
    decay: DMatrix<C64>,
}

impl MasterEquation {
    pub fn new(dims: SpaceDims, collapse: Vec<DMatrix<C64>>) -> Result<Self> {
        let d = dims.dim();
        let mut decay = DMatrix::zeros(d, d);
        for l in &collapse {
            if l.shape() != (d, d) {
                return Err(Error::Shape {
                    expected: d,
                    found: l.nrows(),
                });
            }
            decay += l.adjoint() * l;
        }
        Ok(Self {
            dims,
            collapse,
            decay,
        })
    }

    /// Bath channels of `params`, plus the measurement channel if one is active.
    pub fn for_model(
        params: &ModelParams,
        meas: &MeasurementConfig,
        baths: bool,
        dims: SpaceDims,
    ) -> Result<Self> {
        let mut ops: Vec<(f64, QOperator)> = Vec::new();
        if baths {
            ops.push((params.kappa, annihilation(dims, Mode::Photon)));
            ops.push((params.gamma * (params.nbar_th + 1.0), annihilation(dims, Mode::Phonon)));
            ops.push((params.gamma * params.nbar_th, creation(dims, Mode::Phonon)));
        }
        match meas.scheme {
            Scheme::None => {}
            Scheme::Absorptive => ops.push((meas.lambda, annihilation(dims, Mode::Photon))),
            Scheme::Dispersive => ops.push((meas.lambda, number_op(dims, Mode::Photon))),
        }
        let collapse = ops
            .into_iter()
            .filter(|(rate, _)| *rate > 0.0)
            .map(|(rate, op)| op.matrix() * C64::from(rate.sqrt()))
            .collect();
        Self::new(dims, collapse)
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    /// Right-hand side of the master equation.
    pub fn rhs(&self, h: &DMatrix<C64>, rho: &DensityMatrix) -> DensityMatrix {
        let i = C64::new(0.0, 1.0);
        let h_rho = h * rho;
        let mut out = (&h_rho - h_rho.adjoint()) * (-i);
        for l in &self.collapse {
            out += l * rho * l.adjoint();
        }
        let d_rho = &self.decay * rho;
        out -= (&d_rho + d_rho.adjoint()) * C64::from(0.5);
        out
    }

    /// One RK4 step from `t` to `t + dt` with a time-dependent Hamiltonian.
    pub fn rk4_step<F>(&self, rho: &DensityMatrix, t: f64, dt: f64, hamiltonian: &F) -> DensityMatrix
    where
        F: Fn(f64) -> DMatrix<C64>,
    {
        let h0 = hamiltonian(t);
        let hm = hamiltonian(t + 0.5 * dt);
        let h1 = hamiltonian(t + dt);
        let half = C64::from(0.5 * dt);
        let k1 = self.rhs(&h0, rho);
        let k2 = self.rhs(&hm, &(rho + &k1 * half));
        let k3 = self.rhs(&hm, &(rho + &k2 * half));
        let k4 = self.rhs(&h1, &(rho + &k3 * C64::from(dt)));
        let mut next = rho + (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(dt / 6.0);
        // keep exactly Hermitian
        next = (&next + next.adjoint()) * C64::from(0.5);
        next
    }

    /// Integrate over `n_steps` steps of `dt` starting at `t0`.
    pub fn evolve<F>(
        &self,
        rho: &DensityMatrix,
        t0: f64,
        dt: f64,
        n_steps: usize,
        hamiltonian: &F,
    ) -> DensityMatrix
    where
        F: Fn(f64) -> DMatrix<C64>,
    {
        let mut r = rho.clone();
        for k in 0..n_steps {
            r = self.rk4_step(&r, t0 + k as f64 * dt, dt, hamiltonian);
        }
        r
    }
}

/// `|ψ><ψ|`.
pub fn pure_density(state: &QState) -> DensityMatrix {
    let v = state.vector();
    v * v.adjoint()
}

/// `Tr(ρ O)`.
pub fn expectation_rho(rho: &DensityMatrix, op: &QOperator) -> C64 {
    (rho * op.matrix()).trace()
}

/// `½ ‖a - b‖₁` for Hermitian `a`, `b`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let diff = a - b;
    let diff = (&diff + diff.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(diff);
    0.5 * eig.eigenvalues.iter().map(|e| e.abs()).sum::<f64>()
}
