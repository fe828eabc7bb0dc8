//! Single runs and measurement-strength sweeps.

use std::sync::Arc;

use otto_core::engine::{run_ensemble, CycleConfig, CycleResult};
use otto_core::traj::MeasurementConfig;

use crate::config::Experiment;
use crate::error::Result;
use crate::output::PointResult;

/// Run the configured ensemble once.
pub fn run_single(experiment: &Experiment, workers: usize) -> Result<PointResult> {
    let cycle = &experiment.cycle;
    Ok(PointResult {
        scheme: cycle.meas.scheme,
        lambda: cycle.meas.lambda,
        result: Arc::new(run_ensemble(cycle, workers)?),
    })
}

/// The configuration that actually determines a point's result: with
/// nothing measured, scheme and strength are irrelevant.
fn effective(config: &CycleConfig) -> CycleConfig {
    if config.meas.is_active() {
        config.clone()
    } else {
        CycleConfig {
            meas: MeasurementConfig::default(),
            ..config.clone()
        }
    }
}

/// Run every (scheme, λ) point, schemes outermost. All points share the
/// master seed, so they see the same initial draws and noise streams, and
/// points with nothing measured are computed once. `on_point` receives the
/// completed points after each one, so partial sweeps can be saved.
pub fn run_sweep<F>(experiment: &Experiment, workers: usize, mut on_point: F) -> Result<Vec<PointResult>>
where
    F: FnMut(&[PointResult]) -> Result<()>,
{
    let mut done: Vec<(CycleConfig, Arc<CycleResult>)> = Vec::new();
    let mut points = Vec::new();
    for (scheme, lambda, config) in experiment.sweep_points()? {
        let key = effective(&config);
        let result = match done.iter().find(|(c, _)| *c == key) {
            Some((_, r)) => Arc::clone(r),
            None => {
                let r = Arc::new(run_ensemble(&key, workers)?);
                done.push((key, Arc::clone(&r)));
                r
            }
        };
        points.push(PointResult { scheme, lambda, result });
        on_point(&points)?;
    }
    Ok(points)
}
