//! CSV and manifest emission.
//!
//! Every CSV has a header row, `.` decimals, UTF-8 and LF line endings.
//! Units: energies in ħω_m, times in 1/ω_m, rates in ω_m.
//!
//! * `summary.csv`: scheme, lambda, mean_work, sem_work, var_work, q_in,
//!   efficiency, n_traj, then stroke1_mean_work, stroke1_var_work, q_in_sem,
//!   mean_jumps. Missing values (no heat, no efficiency) are empty fields.
//! * `populations.csv`: scheme, lambda, t, delta, mean_n_a, mean_N_A, mean_N_B.
//! * `work_hist.csv`: scheme, lambda, bin_center, probability,
//!   stroke1_probability; histograms of -W over the cycle and over the
//!   first stroke.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use otto_core::engine::CycleResult;
use otto_core::traj::Scheme;

use crate::error::{CliError, Result};
use crate::manifest::{RunManifest, MANIFEST_FILE};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const POPULATIONS_FILE: &str = "populations.csv";
pub const HISTOGRAM_FILE: &str = "work_hist.csv";

pub const SUMMARY_HEADER: &[&str] = &[
    "scheme",
    "lambda",
    "mean_work",
    "sem_work",
    "var_work",
    "q_in",
    "efficiency",
    "n_traj",
    "stroke1_mean_work",
    "stroke1_var_work",
    "q_in_sem",
    "mean_jumps",
];
pub const POPULATIONS_HEADER: &[&str] = &["scheme", "lambda", "t", "delta", "mean_n_a", "mean_N_A", "mean_N_B"];
pub const HISTOGRAM_HEADER: &[&str] = &["scheme", "lambda", "bin_center", "probability", "stroke1_probability"];

/// One completed ensemble, labelled by its measurement settings.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub scheme: Scheme,
    pub lambda: f64,
    pub result: Arc<CycleResult>,
}

/// Make sure `dir` exists and is writable before anything is computed.
pub fn preflight(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let probe = dir.join(".write_probe");
    File::create(&probe)
        .and_then(|mut f| f.write_all(b"ok"))
        .map_err(|e| CliError::io(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| CliError::io(&probe, e))
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn summary_rows(points: &[PointResult]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            let r = &p.result;
            vec![
                p.scheme.name().to_string(),
                num(p.lambda),
                num(r.mean_work),
                num(r.sem_work),
                num(r.var_work),
                opt(r.q_in),
                opt(r.efficiency),
                r.n_traj_used.to_string(),
                num(r.stroke1.mean),
                num(r.stroke1.var),
                opt(r.q_in_sem),
                num(r.mean_jumps),
            ]
        })
        .collect()
}

/// Write the manifest and the three CSVs for `points`. With no points the
/// CSVs hold only their headers.
pub fn write_outputs(dir: &Path, manifest: &RunManifest, points: &[PointResult]) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.emit()).map_err(|e| CliError::io(&path, e))?;

    write_csv(&dir.join(SUMMARY_FILE), SUMMARY_HEADER, summary_rows(points))?;

    let populations = points.iter().flat_map(|p| {
        let c = &p.result.populations;
        (0..c.len()).map(move |k| {
            vec![
                p.scheme.name().to_string(),
                num(p.lambda),
                num(c.t[k]),
                num(c.delta[k]),
                num(c.photons[k]),
                num(c.pop_a[k]),
                num(c.pop_b[k]),
            ]
        })
    });
    write_csv(&dir.join(POPULATIONS_FILE), POPULATIONS_HEADER, populations)?;

    let histograms = points.iter().flat_map(|p| {
        let h = &p.result.histogram;
        let h1 = &p.result.stroke1_histogram;
        h.centers().into_iter().enumerate().map(move |(k, c)| {
            vec![
                p.scheme.name().to_string(),
                num(p.lambda),
                num(c),
                num(h.probabilities[k]),
                num(h1.probabilities[k]),
            ]
        })
    });
    write_csv(&dir.join(HISTOGRAM_FILE), HISTOGRAM_HEADER, histograms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preflight_rejects_a_file_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("taken");
        std::fs::write(&blocker, "x").unwrap();
        let err = preflight(&blocker.join("sub")).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::IO);
        preflight(&dir.path().join("fresh")).unwrap();
    }
}
