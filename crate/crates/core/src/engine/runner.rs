//! Parallel ensemble execution.

use rayon::prelude::*;

use super::cycle::CycleContext;
use super::stats::{CycleResult, EnsembleAccumulator};
use super::CycleConfig;
use crate::{Error, Result};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "OTTO_WORKERS";

/// Trajectories per parallel batch; records are reduced batch by batch.
const BATCH: usize = 256;

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Run `config.n_traj` trajectories on `workers` threads.
pub fn run_ensemble(config: &CycleConfig, workers: usize) -> Result<CycleResult> {
    let ctx = CycleContext::new(config)?;
    run_ensemble_with(&ctx, config.n_traj, workers)
}

/// Run trajectories `0..n_traj` of a prepared context. The reduction is in
/// index order, so the result does not depend on `workers`.
pub fn run_ensemble_with(ctx: &CycleContext, n_traj: usize, workers: usize) -> Result<CycleResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut acc = EnsembleAccumulator::new(ctx.config().hist);
    let mut start = 0;
    while start < n_traj {
        let end = (start + BATCH).min(n_traj);
        let records: Vec<_> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| ctx.run_trajectory(i as u64))
                .collect()
        });
        for r in records {
            acc.push(&r?)?;
        }
        start = end;
    }
    acc.finish()
}
