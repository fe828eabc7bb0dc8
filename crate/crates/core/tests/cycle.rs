use otto_core::engine::{run_ensemble, CycleConfig, CycleSpan, InitialState};
use otto_core::model::normal_mode_frequencies;
use otto_core::qops::SpaceDims;
use otto_core::traj::{MeasurementConfig, Scheme};

fn ideal_first_stroke(dims: SpaceDims) -> CycleConfig {
    CycleConfig {
        dims,
        initial: InitialState::Fock(4),
        span: CycleSpan::FirstStroke,
        adiabatic_damping: false,
        n_traj: 1,
        ..CycleConfig::default()
    }
}

#[test]
fn ideal_stroke_is_stable_under_truncation() {
    let w20 = run_ensemble(&ideal_first_stroke(SpaceDims::new(20, 20).unwrap()), 1).unwrap().mean_work;
    let w24 = run_ensemble(&ideal_first_stroke(SpaceDims::new(24, 24).unwrap()), 1).unwrap().mean_work;
    assert!((w24 / w20 - 1.0).abs() < 0.01, "{w20} vs {w24}");

    let p = CycleConfig::default().params;
    let quanta = 4.0 * (normal_mode_frequencies(&p, p.delta_f).unwrap().1 - normal_mode_frequencies(&p, p.delta_i).unwrap().1);
    assert!((w20 / quanta - 1.0).abs() < 0.03, "{w20} vs {quanta}");
}

#[test]
fn halving_dt_leaves_monitored_work_unchanged() {
    let base = CycleConfig {
        dims: SpaceDims::new(10, 10).unwrap(),
        meas: MeasurementConfig::new(Scheme::Absorptive, 0.04).unwrap(),
        n_traj: 60,
        ..ideal_first_stroke(SpaceDims::new(10, 10).unwrap())
    };
    let coarse = run_ensemble(&base, 1).unwrap();
    let mut fine_config = base.clone();
    fine_config.stepper.dt = base.stepper.dt / 2.0;
    let fine = run_ensemble(&fine_config, 1).unwrap();
    // the noise paths differ between step sizes

    let tol = 3.0 * coarse.sem_work.hypot(fine.sem_work);
    assert!(
        (coarse.mean_work - fine.mean_work).abs() < tol,
        "{} vs {} (tol {tol})",
        coarse.mean_work,
        fine.mean_work
    );
}
