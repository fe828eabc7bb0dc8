//! Fast self-checks behind the `validate` verb.

use nalgebra::{DMatrix, SymmetricEigen};
use otto_core::engine::{run_ensemble, thermal_distribution, CycleConfig, CycleSpan, InitialState, PrepBasis};
use otto_core::model::{detuning_derivative, hamiltonian, normal_mode_frequencies, normal_modes, ModelParams};
use otto_core::qops::SpaceDims;
use otto_core::traj::{MeasurementConfig, Scheme};

use crate::error::Result;

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Closed-form frequencies against the symplectic decomposition and the
/// lowest excitations of the truncated Hamiltonian.
fn normal_modes_agree(params: &ModelParams) -> Result<Check> {
    let dims = SpaceDims::new(10, 10)?;
    let mut worst: f64 = 0.0;
    for k in 0..=8 {
        let delta = params.delta_i + (params.delta_f - params.delta_i) * k as f64 / 8.0;
        let (wa, wb) = normal_mode_frequencies(params, delta)?;
        let modes = normal_modes(params, delta)?;
        let real: DMatrix<f64> = hamiltonian(params, delta, dims).matrix().map(|c| c.re);
        let mut e = SymmetricEigen::new(real).eigenvalues.as_slice().to_vec();
        e.sort_by(f64::total_cmp);
        // lowest excitation is the B quantum; A is the first level not a B multiple
        let gap_b = e[1] - e[0];
        let gap_a = e
            .iter()
            .skip(1)
            .map(|x| x - e[0])
            .find(|g| (g / wb - (g / wb).round()).abs() > 1e-3)
            .unwrap_or(f64::NAN);
        for err in [wa - modes.omega_a, wb - modes.omega_b, gap_b - wb, gap_a - wa] {
            worst = worst.max(err.abs());
        }
    }
    Ok(check("normal modes", worst < 1e-6, format!("max deviation {worst:.2e}")))
}

fn derivative_identity(params: &ModelParams) -> Result<Check> {
    let dims = SpaceDims::new(6, 6)?;
    let h = 1e-3;
    let delta = -1.7;
    let fd = (hamiltonian(params, delta + h, dims).matrix() - hamiltonian(params, delta - h, dims).matrix())
        / otto_core::C64::from(2.0 * h);
    let err = (fd - detuning_derivative(dims).matrix()).map(|c| c.norm()).max();
    Ok(check("dH/dDelta = -n_a", err < 1e-10, format!("max deviation {err:.2e}")))
}

fn thermal_normalization(params: &ModelParams, dims: SpaceDims) -> Result<Check> {
    let p = thermal_distribution(params.nbar_th, dims.n_phonon())?;
    let total: f64 = p.iter().sum();
    let mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
    Ok(check(
        "thermal preparation",
        (total - 1.0).abs() < 1e-12,
        format!("sum {total:.12}, truncated mean {mean:.4}"),
    ))
}

/// One unmonitored, undamped first stroke from the dressed state with four
/// B quanta.
fn ideal_stroke_work(base: &CycleConfig) -> Result<Check> {
    let config = CycleConfig {
        meas: MeasurementConfig::default(),
        span: CycleSpan::FirstStroke,
        initial: InitialState::Fock(4),
        basis: PrepBasis::Polariton,
        adiabatic_damping: false,
        n_traj: 1,
        ..base.clone()
    };
    let p = &config.params;
    let expected = 4.0 * (normal_mode_frequencies(p, p.delta_f)?.1 - normal_mode_frequencies(p, p.delta_i)?.1);
    let w = run_ensemble(&config, 1)?.mean_work;
    let rel = (w / expected - 1.0).abs();
    Ok(check(
        "ideal stroke work",
        rel < 0.03,
        format!("W = {w:.4}, 4(w_B(f) - w_B(i)) = {expected:.4}, rel. dev. {rel:.2e}"),
    ))
}

/// A short monitored ensemble gives identical records on 1 and 3 workers.
fn worker_independence(base: &CycleConfig) -> Result<Check> {
    let config = CycleConfig {
        dims: SpaceDims::new(8, 8)?,
        meas: MeasurementConfig::new(Scheme::Dispersive, 0.04)?,
        params: ModelParams { nbar_th: 1.0, ..base.params },
        span: CycleSpan::FirstStroke,
        t1: 5.0,
        n_traj: 12,
        ..base.clone()
    };
    let a = run_ensemble(&config, 1)?;
    let b = run_ensemble(&config, 3)?;
    Ok(check(
        "worker independence",
        a == b,
        format!("mean work {:.6} vs {:.6}", a.mean_work, b.mean_work),
    ))
}

/// Run every check; errors inside a check abort the suite.
pub fn run_checks(base: &CycleConfig) -> Result<Vec<Check>> {
    Ok(vec![
        normal_modes_agree(&base.params)?,
        derivative_identity(&base.params)?,
        thermal_normalization(&base.params, base.dims)?,
        ideal_stroke_work(base)?,
        worker_independence(base)?,
    ])
}
