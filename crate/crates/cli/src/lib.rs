//! Command-line front end of the optomechanical Otto engine simulator:
//! configuration files, run manifests, single runs and measurement-strength
//! sweeps, and CSV output.

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod run;
pub mod validate;

use std::path::{Path, PathBuf};

pub use config::{parse_config, Experiment, SweepSpec, QUICK_TRAJECTORIES};
pub use error::{exit, CliError, Result};
pub use manifest::RunManifest;

/// Options shared by all verbs.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quick: bool,
    /// Record every integration step instead of every `output.stride`.
    pub full_series: bool,
    pub overrides: Vec<String>,
    /// Worker threads; `None` reads the environment.
    pub workers: Option<usize>,
}

impl Options {
    /// The configuration after file, overrides and command-line flags.
    pub fn experiment(&self) -> Result<Experiment> {
        let mut e = parse_config(self.config.as_deref(), &self.overrides)?;
        if let Some(seed) = self.seed {
            e.cycle.stepper.seed = seed;
        }
        if self.quick {
            e.cycle.n_traj = QUICK_TRAJECTORIES;
        }
        if self.full_series {
            e.cycle.stride = e.cycle.stepper.dt;
        }
        Ok(e)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("otto-out"))
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(otto_core::engine::default_workers)
    }
}

/// Run one ensemble and write its outputs.
pub fn cmd_run(opts: &Options) -> Result<PathBuf> {
    let experiment = opts.experiment()?;
    let dir = opts.out_dir();
    output::preflight(&dir)?;
    let manifest = RunManifest::new(experiment, "run", &dir);
    let point = run::run_single(&manifest.experiment, opts.workers())?;
    output::write_outputs(&dir, &manifest, &[point])?;
    Ok(dir)
}

/// Run the configured sweep, rewriting the outputs after every point.
pub fn cmd_sweep(opts: &Options) -> Result<PathBuf> {
    let experiment = opts.experiment()?;
    experiment.sweep_points()?;
    let dir = opts.out_dir();
    output::preflight(&dir)?;
    let manifest = RunManifest::new(experiment, "sweep", &dir);
    output::write_outputs(&dir, &manifest, &[])?;
    run::run_sweep(&manifest.experiment, opts.workers(), |points| {
        output::write_outputs(&dir, &manifest, points)
    })?;
    Ok(dir)
}

/// Validate the configuration and write the manifest with header-only CSVs.
pub fn cmd_dry_run(opts: &Options) -> Result<PathBuf> {
    let experiment = opts.experiment()?;
    let dir = opts.out_dir();
    output::preflight(&dir)?;
    let manifest = RunManifest::new(experiment, "dry-run", &dir);
    output::write_outputs(&dir, &manifest, &[])?;
    Ok(dir)
}

/// Run the self-check suite; returns the checks for reporting.
pub fn cmd_validate(opts: &Options) -> Result<Vec<validate::Check>> {
    validate::run_checks(&opts.experiment()?.cycle)
}

/// Read a manifest file.
pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RunManifest::parse(&text, &path.display().to_string())
}
