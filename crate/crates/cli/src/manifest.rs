//! Run manifest: the resolved configuration plus provenance, written next to
//! every output. A manifest is itself a valid configuration file.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{build, emit_config, parse_document, Experiment};
use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.cfg";

/// Version string recorded in manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub experiment: Experiment,
    pub version: String,
    /// Command that produced the outputs (`run`, `sweep`, `dry-run`).
    pub command: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub out_dir: PathBuf,
}

impl RunManifest {
    pub fn new(experiment: Experiment, command: &str, out_dir: &Path) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            experiment,
            version: VERSION.to_string(),
            command: command.to_string(),
            timestamp,
            out_dir: out_dir.to_path_buf(),
        }
    }

    /// Master seed of every trajectory stream.
    pub fn seed(&self) -> u64 {
        self.experiment.cycle.stepper.seed
    }

    pub fn emit(&self) -> String {
        format!(
            "# otto run manifest; rerun with --config on this file\n\
             manifest.version = {}\n\
             manifest.command = {}\n\
             manifest.timestamp = {}\n\
             manifest.out_dir = \"{}\"\n\n{}",
            self.version,
            self.command,
            self.timestamp,
            self.out_dir.display(),
            emit_config(&self.experiment)
        )
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let (experiment, meta) = build(&parse_document(text, source)?)?;
        let get = |key: &str| {
            meta.iter()
                .find(|e| e.key == key)
                .map(|e| e.value.clone())
                .ok_or_else(|| CliError::Config {
                    origin: None,
                    key: Some(key.to_string()),
                    message: format!("{source}: missing manifest entry"),
                })
        };
        let timestamp = get("manifest.timestamp")?;
        Ok(Self {
            experiment,
            version: get("manifest.version")?,
            command: get("manifest.command")?,
            timestamp: timestamp.parse().map_err(|_| CliError::Config {
                origin: None,
                key: Some("manifest.timestamp".into()),
                message: format!("invalid timestamp '{timestamp}'"),
            })?,
            out_dir: PathBuf::from(get("manifest.out_dir")?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use otto_core::traj::Scheme;

    #[test]
    fn round_trip() {
        let mut e = Experiment::default();
        e.cycle.meas.scheme = Scheme::Absorptive;
        e.cycle.meas.lambda = 0.02;
        e.cycle.stepper.seed = 77;
        let m = RunManifest::new(e, "run", Path::new("out dir/x"));
        let back = RunManifest::parse(&m.emit(), "m").unwrap();
        assert_eq!(back, m);
        assert_eq!(back.seed(), 77);
    }
}
