//! Linearized optomechanical Hamiltonian, its normal modes, and the detuning
//! schedule of the adiabatic strokes.
//!
//! `H(Δ) = -Δ a†a + ω_m b†b + G (a† + a)(b† + b)` with `ħ = 1`.

mod polariton;
mod schedule;

pub use polariton::{
    normal_mode_frequencies, normal_modes, polariton_data, NormalModes, PolaritonData,
    QuadratureProbe,
};
pub use schedule::{schedule_delta, Schedule, ScheduleKind};

use nalgebra::DMatrix;

use crate::qops::{annihilation, number_op, LinearMap, Mode, QOperator, SpaceDims};
use crate::{Error, Result, C64};

/// Physical constants of the linearized engine, in units of `omega_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Mechanical frequency; the unit of every other frequency.
    pub omega_m: f64,
    /// Linearized optomechanical coupling `G`.
    pub coupling: f64,
    /// Detuning at the start of the power stroke (large and negative).
    pub delta_i: f64,
    /// Detuning at the end of the power stroke (small and negative).
    pub delta_f: f64,
    /// Cavity damping rate (zero-temperature bath).
    pub kappa: f64,
    /// Mechanical damping rate.
    pub gamma: f64,
    /// Thermal occupation of the mechanical (hot) bath.
    pub nbar_th: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega_m: 1.0,
            coupling: 0.2,
            delta_i: -3.0,
            delta_f: -0.4,
            kappa: 5e-3,
            gamma: 1e-4,
            nbar_th: 4.0,
        }
    }
}

impl ModelParams {
    /// Check the ordering of the detunings, the coupling bound, non-negative
    /// rates, and dynamical stability over the whole sweep.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega_m,
            self.coupling,
            self.delta_i,
            self.delta_f,
            self.kappa,
            self.gamma,
            self.nbar_th,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("model parameters must be finite".into()));
        }
        if self.omega_m <= 0.0 {
            return Err(Error::Config(format!("omega_m must be positive, got {}", self.omega_m)));
        }
        if !(self.delta_i < -self.omega_m && -self.omega_m < self.delta_f && self.delta_f < 0.0) {
            return Err(Error::Config(format!(
                "detunings must satisfy delta_i < -omega_m < delta_f < 0, got delta_i = {}, delta_f = {}",
                self.delta_i, self.delta_f
            )));
        }
        if !(0.0..self.omega_m / 2.0).contains(&self.coupling) {
            return Err(Error::Config(format!(
                "coupling G must lie in [0, omega_m/2), got {}",
                self.coupling
            )));
        }
        for (name, v) in [("kappa", self.kappa), ("gamma", self.gamma), ("nbar_th", self.nbar_th)] {
            if v < 0.0 {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        // The lower branch softens as delta -> 0, so delta_f is the binding point.
        normal_mode_frequencies(self, self.delta_f)?;
        normal_mode_frequencies(self, self.delta_i)?;
        Ok(())
    }
}

/// Dense Hamiltonian at detuning `delta`, normal ordered so `<0,0|H|0,0> = 0`.
pub fn hamiltonian(params: &ModelParams, delta: f64, dims: SpaceDims) -> QOperator {
    let n_a = number_op(dims, Mode::Photon);
    let n_b = number_op(dims, Mode::Phonon);
    let a = annihilation(dims, Mode::Photon);
    let b = annihilation(dims, Mode::Phonon);
    let xa = a.matrix() + a.matrix().adjoint();
    let xb = b.matrix() + b.matrix().adjoint();
    let m: DMatrix<C64> = n_a.matrix() * C64::from(-delta)
        + n_b.matrix() * C64::from(params.omega_m)
        + (xa * xb) * C64::from(params.coupling);
    QOperator::from_matrix(dims, m, true).expect("dimensions consistent by construction")
}

/// `∂H/∂Δ = -a†a`, exact because `H` is linear in the detuning.
pub fn detuning_derivative(dims: SpaceDims) -> QOperator {
    number_op(dims, Mode::Photon).scale(-1.0)
}

/// Matrix-free form of `H(Δ)` for the integrators.
///
/// Applies the Hamiltonian through its stencil in the Fock basis, which
/// costs `O(dim)` per product instead of `O(dim^2)`. The coupling is applied
/// as two whole-vector passes, `u = (a + a†) x` then `y += G (b + b†) u`, with
/// the ladder weights tabulated per basis index.
#[derive(Debug, Clone)]
pub struct SweptHamiltonian {
    dims: SpaceDims,
    coupling: f64,
    /// `<i|a†a|i>` and `ω_m <i|b†b|i>` per basis index.
    photon_number: Vec<f64>,
    phonon_energy: Vec<f64>,
    /// Weights of `x[i - n_phonon]` and `x[i + n_phonon]` in `(a + a†) x`.
    photon_down: Vec<f64>,
    photon_up: Vec<f64>,
    /// Weights of `u[i - 1]` and `u[i + 1]` in `G (b + b†) u`.
    phonon_down: Vec<f64>,
    phonon_up: Vec<f64>,
}

impl SweptHamiltonian {
    pub fn new(params: &ModelParams, dims: SpaceDims) -> Self {
        let (na, nb) = (dims.n_photon(), dims.n_phonon());
        let levels: Vec<(usize, usize)> = (0..dims.dim()).map(|i| dims.levels(i)).collect();
        let g = params.coupling;
        let sq = |k: usize| (k as f64).sqrt();
        Self {
            dims,
            coupling: g,
            photon_number: levels.iter().map(|&(ia, _)| ia as f64).collect(),
            phonon_energy: levels.iter().map(|&(_, ib)| params.omega_m * ib as f64).collect(),
            photon_down: levels.iter().map(|&(ia, _)| sq(ia)).collect(),
            photon_up: levels
                .iter()
                .map(|&(ia, _)| if ia + 1 < na { sq(ia + 1) } else { 0.0 })
                .collect(),
            phonon_down: levels.iter().map(|&(_, ib)| g * sq(ib)).collect(),
            phonon_up: levels
                .iter()
                .map(|&(_, ib)| if ib + 1 < nb { g * sq(ib + 1) } else { 0.0 })
                .collect(),
        }
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    /// The Hamiltonian frozen at detuning `delta`.
    pub fn at(&self, delta: f64) -> DetunedHamiltonian<'_> {
        DetunedHamiltonian { family: self, delta }
    }

    /// `<psi|H(delta)|psi>` for a normalized `psi`.
    pub fn energy(&self, delta: f64, psi: &[C64], scratch: &mut [C64]) -> f64 {
        self.at(delta).apply_into(psi, scratch);
        crate::qops::inner(psi, scratch).re
    }
}

/// `H(Δ)` at a fixed detuning, borrowed from a [`SweptHamiltonian`].
#[derive(Debug, Clone, Copy)]
pub struct DetunedHamiltonian<'a> {
    family: &'a SweptHamiltonian,
    delta: f64,
}

impl DetunedHamiltonian<'_> {
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

const STACK_DIM: usize = 1024;

impl LinearMap for DetunedHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.family.dims.dim()
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let h = self.family;
        let n = h.dims.dim();
        let nb = h.dims.n_phonon();
        let x = &x[..n];
        let y = &mut y[..n];
        let minus_delta = -self.delta;
        for (((o, v), na), eb) in y.iter_mut().zip(x).zip(&h.photon_number).zip(&h.phonon_energy) {
            *o = v * (minus_delta * na + eb);
        }
        if h.coupling == 0.0 {
            return;
        }

        let zero = C64::new(0.0, 0.0);
        let mut stack = [zero; STACK_DIM];
        let mut heap = Vec::new();
        let u: &mut [C64] = if n <= STACK_DIM {
            &mut stack[..n]
        } else {
            heap.resize(n, zero);
            &mut heap
        };

        // u = (a + a†) x
        for ((uc, v), w) in u[nb..].iter_mut().zip(&x[..n - nb]).zip(&h.photon_down[nb..]) {
            *uc = v * w;
        }
        u[..nb].iter_mut().for_each(|c| *c = zero);
        for ((uc, v), w) in u[..n - nb].iter_mut().zip(&x[nb..]).zip(&h.photon_up[..n - nb]) {
            *uc += v * w;
        }
        // y += G (b + b†) u
        for ((o, v), w) in y[1..].iter_mut().zip(&u[..n - 1]).zip(&h.phonon_down[1..]) {
            *o += v * w;
        }
        for ((o, v), w) in y[..n - 1].iter_mut().zip(&u[1..]).zip(&h.phonon_up[..n - 1]) {
            *o += v * w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{expectation, QState};
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn dims(a: usize, b: usize) -> SpaceDims {
        SpaceDims::new(a, b).unwrap()
    }

    fn params(g: f64) -> ModelParams {
        ModelParams {
            coupling: g,
            ..ModelParams::default()
        }
    }

    #[test]
    fn default_params_are_valid() {
        ModelParams::default().validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_parameter_sets() {
        let bad = [
            ModelParams { delta_i: -1.0, delta_f: -1.5, ..Default::default() },
            ModelParams { delta_f: 0.1, ..Default::default() },
            ModelParams { coupling: 0.5, ..Default::default() },
            ModelParams { kappa: -1.0, ..Default::default() },
            ModelParams { nbar_th: f64::NAN, ..Default::default() },
            // |delta_f| below 4 G^2 / omega_m: lower branch goes soft
            ModelParams { coupling: 0.45, delta_f: -0.5, ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn decoupled_resonant_hamiltonian_is_diagonal() {
        let d = dims(5, 5);
        let h = hamiltonian(&params(0.0), -1.0, d);
        for i in 0..d.dim() {
            let (na, nb) = d.levels(i);
            for j in 0..d.dim() {
                let expect = if i == j { (na + nb) as f64 } else { 0.0 };
                assert_abs_diff_eq!(h.matrix()[(i, j)].re, expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn vacuum_energy_is_zero() {
        let d = dims(6, 6);
        for (g, delta) in [(0.2, -3.0), (0.1, -0.5), (0.4, -2.0)] {
            let h = hamiltonian(&params(g), delta, d);
            assert_eq!(expectation(&QState::vacuum(d), &h).unwrap().re, 0.0);
        }
    }

    #[test]
    fn low_spectrum_matches_normal_modes_at_initial_detuning() {
        let d = dims(20, 20);
        let p = params(0.2);
        let h = hamiltonian(&p, -3.0, d);
        let real = h.matrix().map(|c| c.re);
        let mut e: Vec<f64> = SymmetricEigen::new(real).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let (wa, wb) = normal_mode_frequencies(&p, -3.0).unwrap();
        assert_abs_diff_eq!(e[1] - e[0], wb, epsilon = 1e-6);
        assert_abs_diff_eq!(wb, 0.9698, epsilon = 5e-4);
        assert_abs_diff_eq!(wa, 3.0099, epsilon = 5e-4);
        // ω_A sits above the 1..3-quantum B ladder at this detuning
        let excit: Vec<f64> = e.iter().map(|x| x - e[0]).collect();
        assert!(excit.iter().any(|x| (x - wa).abs() < 1e-6));
    }

    #[test]
    fn detuning_derivative_is_exact() {
        let d = dims(6, 5);
        let p = params(0.2);
        let eps = 1e-3;
        let delta = -1.3;
        let fd = (&hamiltonian(&p, delta + eps, d) - &hamiltonian(&p, delta - eps, d)).scale(0.5 / eps);
        let diff = &fd - &detuning_derivative(d);
        assert!(diff.max_abs() < 1e-10, "{}", diff.max_abs());
    }

    #[test]
    fn stencil_matches_dense_hamiltonian() {
        for (na, nb) in [(2, 2), (3, 7), (6, 4), (20, 20)] {
            let d = dims(na, nb);
            let p = params(0.17);
            let family = SweptHamiltonian::new(&p, d);
            let x: Vec<C64> = (0..d.dim())
                .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 1.1).cos()))
                .collect();
            for delta in [-3.0, -1.0, -0.4] {
                let dense = hamiltonian(&p, delta, d);
                let mut y1 = vec![C64::new(0.0, 0.0); d.dim()];
                let mut y2 = y1.clone();
                dense.apply_into(&x, &mut y1);
                family.at(delta).apply_into(&x, &mut y2);
                for (u, v) in y1.iter().zip(&y2) {
                    assert!((u - v).norm() < 1e-12);
                }
            }
        }
    }
}
