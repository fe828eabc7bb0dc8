//! Flat `key = value` configuration files.
//!
//! Grammar: one `key = value` pair per line, `#` starts a comment, blank
//! lines are ignored and keys are dotted (`model.G`, `meas.lambda`). List
//! values are comma separated. Every key is optional; unknown or repeated
//! keys are errors.

use std::collections::HashMap;
use std::path::Path;

use otto_core::engine::{CycleConfig, InitialState};
use otto_core::qops::SpaceDims;
use otto_core::traj::{MeasurementConfig, Scheme};

use crate::error::{CliError, Result};

/// Trajectory count of the `--quick` preset.
pub const QUICK_TRAJECTORIES: usize = 2000;

/// Measurement strengths and schemes of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub lambdas: Vec<f64>,
    pub schemes: Vec<Scheme>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            lambdas: vec![0.0, 0.01, 0.02, 0.04],
            schemes: vec![Scheme::Absorptive, Scheme::Dispersive],
        }
    }
}

/// Everything a configuration file can set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Experiment {
    pub cycle: CycleConfig,
    pub sweep: SweepSpec,
}

impl Experiment {
    /// Cycle configurations of every sweep point, schemes outermost.
    pub fn sweep_points(&self) -> Result<Vec<(Scheme, f64, CycleConfig)>> {
        if self.sweep.lambdas.is_empty() || self.sweep.schemes.is_empty() {
            return Err(keyed("sweep.lambdas", "a sweep needs at least one scheme and one strength"));
        }
        let mut out = Vec::new();
        for &scheme in &self.sweep.schemes {
            for &lambda in &self.sweep.lambdas {
                let meas = MeasurementConfig::new(scheme, lambda).map_err(|e| keyed("sweep.lambdas", e.to_string()))?;
                let config = CycleConfig {
                    meas,
                    ..self.cycle.clone()
                };
                config.validate()?;
                out.push((scheme, lambda, config));
            }
        }
        Ok(out)
    }
}

fn keyed(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        origin: None,
        key: Some(key.to_string()),
        message: message.into(),
    }
}

type Getter = fn(&Experiment) -> String;
type Setter = fn(&mut Experiment, &str) -> std::result::Result<(), String>;

struct Key {
    name: &'static str,
    get: Getter,
    set: Setter,
}

fn float(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("expected a number, got '{v}'"))
}

fn unsigned<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|_| format!("expected a non-negative integer, got '{v}'"))
}

fn boolean(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn named<T: std::str::FromStr<Err = otto_core::Error>>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|e| match e {
        otto_core::Error::Config(m) => m,
        other => other.to_string(),
    })
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn set_dims(e: &mut Experiment, n_photon: usize, n_phonon: usize) -> std::result::Result<(), String> {
    e.cycle.dims = SpaceDims::new(n_photon, n_phonon).map_err(|e| e.to_string())?;
    Ok(())
}

macro_rules! float_key {
    ($name:literal, $($field:ident).+) => {
        Key {
            name: $name,
            get: |e| fmt_f64(e.$($field).+),
            set: |e, v| {
                e.$($field).+ = float(v)?;
                Ok(())
            },
        }
    };
}

macro_rules! bool_key {
    ($name:literal, $($field:ident).+) => {
        Key {
            name: $name,
            get: |e| e.$($field).+.to_string(),
            set: |e, v| {
                e.$($field).+ = boolean(v)?;
                Ok(())
            },
        }
    };
}

macro_rules! named_key {
    ($name:literal, $($field:ident).+) => {
        Key {
            name: $name,
            get: |e| e.$($field).+.name().to_string(),
            set: |e, v| {
                e.$($field).+ = named(v)?;
                Ok(())
            },
        }
    };
}

/// All keys, in the order they are written out.
const KEYS: &[Key] = &[
    float_key!("model.omega_m", cycle.params.omega_m),
    float_key!("model.G", cycle.params.coupling),
    float_key!("model.delta_i", cycle.params.delta_i),
    float_key!("model.delta_f", cycle.params.delta_f),
    float_key!("model.kappa", cycle.params.kappa),
    float_key!("model.gamma", cycle.params.gamma),
    float_key!("model.nbar_th", cycle.params.nbar_th),
    Key {
        name: "space.n_photon",
        get: |e| e.cycle.dims.n_photon().to_string(),
        set: |e, v| {
            let n_phonon = e.cycle.dims.n_phonon();
            set_dims(e, unsigned(v)?, n_phonon)
        },
    },
    Key {
        name: "space.n_phonon",
        get: |e| e.cycle.dims.n_phonon().to_string(),
        set: |e, v| {
            let n_photon = e.cycle.dims.n_photon();
            set_dims(e, n_photon, unsigned(v)?)
        },
    },
    named_key!("meas.scheme", cycle.meas.scheme),
    float_key!("meas.lambda", cycle.meas.lambda),
    float_key!("stepper.dt", cycle.stepper.dt),
    Key {
        name: "stepper.seed",
        get: |e| e.cycle.stepper.seed.to_string(),
        set: |e, v| {
            e.cycle.stepper.seed = unsigned(v)?;
            Ok(())
        },
    },
    bool_key!("stepper.renorm_every_step", cycle.stepper.renorm_every_step),
    float_key!("cycle.t1", cycle.t1),
    float_key!("cycle.t2", cycle.t2),
    float_key!("cycle.t3", cycle.t3),
    float_key!("cycle.t4", cycle.t4),
    Key {
        name: "cycle.n_traj",
        get: |e| e.cycle.n_traj.to_string(),
        set: |e, v| {
            e.cycle.n_traj = unsigned(v)?;
            Ok(())
        },
    },
    named_key!("cycle.stroke4", cycle.stroke4_mode),
    named_key!("cycle.schedule", cycle.schedule_kind),
    named_key!("cycle.span", cycle.span),
    Key {
        name: "cycle.initial",
        get: |e| e.cycle.initial.to_string(),
        set: |e, v| {
            e.cycle.initial = named::<InitialState>(v)?;
            Ok(())
        },
    },
    named_key!("cycle.basis", cycle.basis),
    bool_key!("cycle.adiabatic_damping", cycle.adiabatic_damping),
    bool_key!("cycle.measure_all_strokes", cycle.measure_all_strokes),
    float_key!("output.stride", cycle.stride),
    float_key!("output.thermal_stride", cycle.thermal_stride),
    float_key!("hist.lower", cycle.hist.lower),
    float_key!("hist.upper", cycle.hist.upper),
    float_key!("hist.width", cycle.hist.width),
    Key {
        name: "sweep.lambdas",
        get: |e| e.sweep.lambdas.iter().map(|&l| fmt_f64(l)).collect::<Vec<_>>().join(", "),
        set: |e, v| {
            e.sweep.lambdas = list(v).map(float).collect::<std::result::Result<_, _>>()?;
            Ok(())
        },
    },
    Key {
        name: "sweep.schemes",
        get: |e| e.sweep.schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(", "),
        set: |e, v| {
            e.sweep.schemes = list(v).map(named::<Scheme>).collect::<std::result::Result<_, _>>()?;
            Ok(())
        },
    },
];

/// Keys of the run manifest that carry no configuration.
pub(crate) const MANIFEST_KEYS: &[&str] = &[
    "manifest.version",
    "manifest.command",
    "manifest.timestamp",
    "manifest.out_dir",
];

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// Source name (file path or `--set`) and 1-based line.
    pub origin: (String, usize),
}

/// Split a document into entries. Only syntax is checked here.
pub fn parse_document(text: &str, source: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |key: Option<String>, message: String| CliError::Config {
            origin: Some((source.to_string(), line)),
            key,
            message,
        };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(None, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
            return Err(err(None, format!("invalid key '{key}'")));
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(err(
                Some(key.to_string()),
                format!("repeated key (first set on line {})", prev.origin.1),
            ));
        }
        let value = value.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        out.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            origin: (source.to_string(), line),
        });
    }
    Ok(out)
}

/// Parse `--set key=value` overrides.
pub fn parse_overrides(overrides: &[String]) -> Result<Vec<Entry>> {
    overrides
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let origin = ("--set".to_string(), i + 1);
            let (key, value) = s.split_once('=').ok_or_else(|| CliError::Config {
                origin: Some(origin.clone()),
                key: None,
                message: format!("expected key=value, got '{s}'"),
            })?;
            Ok(Entry {
                key: key.trim().to_string(),
                value: value.trim().to_string(),
                origin,
            })
        })
        .collect()
}

/// Apply entries on top of the defaults and validate the result. Returns the
/// experiment and the `manifest.*` entries, which carry no configuration.
pub fn build(entries: &[Entry]) -> Result<(Experiment, Vec<Entry>)> {
    let mut experiment = Experiment::default();
    let mut origins: HashMap<&'static str, (String, usize)> = HashMap::new();
    let mut manifest = Vec::new();
    for entry in entries {
        if MANIFEST_KEYS.contains(&entry.key.as_str()) {
            manifest.push(entry.clone());
            continue;
        }
        let key = KEYS.iter().find(|k| k.name == entry.key).ok_or_else(|| CliError::Config {
            origin: Some(entry.origin.clone()),
            key: Some(entry.key.clone()),
            message: "unknown key".into(),
        })?;
        (key.set)(&mut experiment, &entry.value).map_err(|message| CliError::Config {
            origin: Some(entry.origin.clone()),
            key: Some(entry.key.clone()),
            message,
        })?;
        origins.insert(key.name, entry.origin.clone());
    }
    if let Err(e) = experiment.cycle.validate() {
        return Err(attribute(e, &origins));
    }
    for &l in &experiment.sweep.lambdas {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(CliError::Config {
                origin: origins.get("sweep.lambdas").cloned(),
                key: Some("sweep.lambdas".into()),
                message: format!("measurement strengths must be non-negative, got {l}"),
            });
        }
    }
    Ok((experiment, manifest))
}

/// Hints from validation messages to the keys that can cause them.
const HINTS: &[(&str, &[&str])] = &[
    ("detunings", &["model.delta_i", "model.delta_f", "model.omega_m"]),
    ("unstable", &["model.G", "model.delta_f", "model.delta_i"]),
    ("coupling", &["model.G"]),
    ("omega_m must", &["model.omega_m"]),
    ("kappa", &["model.kappa"]),
    ("gamma", &["model.gamma"]),
    ("nbar_th", &["model.nbar_th"]),
    ("thermal occupation", &["model.nbar_th", "space.n_phonon"]),
    ("Fock level", &["cycle.initial", "space.n_phonon"]),
    ("dressed state", &["space.n_phonon", "space.n_photon"]),
    ("omega_A", &["stepper.dt"]),
    ("histogram", &["hist.lower", "hist.upper", "hist.width"]),
];

/// Attach the most plausible key, and where it was set, to a validation error.
fn attribute(error: otto_core::Error, origins: &HashMap<&'static str, (String, usize)>) -> CliError {
    let message = match &error {
        otto_core::Error::Config(m) => m.clone(),
        other => other.to_string(),
    };
    let direct = KEYS.iter().map(|k| k.name).filter(|k| message.contains(k)).collect::<Vec<_>>();
    let candidates: Vec<&str> = if direct.is_empty() {
        HINTS
            .iter()
            .filter(|(needle, _)| message.contains(needle))
            .flat_map(|(_, keys)| keys.iter().copied())
            .collect()
    } else {
        direct
    };
    // prefer a key the user actually set, the latest one first
    let set = candidates
        .iter()
        .filter_map(|k| origins.get(k).map(|o| (*k, o.clone())))
        .max_by(|a, b| (a.1 .0 == "--set", a.1 .1).cmp(&(b.1 .0 == "--set", b.1 .1)));
    match (set, candidates.first()) {
        (Some((key, origin)), _) => CliError::Config {
            origin: Some(origin),
            key: Some(key.to_string()),
            message,
        },
        (None, Some(key)) => CliError::Config {
            origin: None,
            key: Some(key.to_string()),
            message,
        },
        (None, None) => CliError::Core(error),
    }
}

/// Read and validate a configuration file with overrides on top. With no
/// file the defaults are used.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<Experiment> {
    let mut entries = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config {
                origin: None,
                key: None,
                message: format!("cannot read configuration {}: {e}", p.display()),
            })?;
            parse_document(&text, &p.display().to_string())?
        }
        None => Vec::new(),
    };
    merge(&mut entries, parse_overrides(overrides)?);
    Ok(build(&entries)?.0)
}

/// Parse configuration text (no overrides).
pub fn parse_config_str(text: &str, source: &str) -> Result<Experiment> {
    Ok(build(&parse_document(text, source)?)?.0)
}

/// Overrides replace file entries with the same key.
pub(crate) fn merge(entries: &mut Vec<Entry>, overrides: Vec<Entry>) {
    for o in overrides {
        entries.retain(|e| e.key != o.key);
        entries.push(o);
    }
}

/// Every key with its current value, one `key = value` line each.
pub fn emit_config(experiment: &Experiment) -> String {
    let mut out = String::new();
    let mut section = "";
    for key in KEYS {
        let head = key.name.split('.').next().unwrap_or("");
        if head != section {
            if !section.is_empty() {
                out.push('\n');
            }
            section = head;
        }
        out.push_str(&format!("{} = {}\n", key.name, (key.get)(experiment)));
    }
    out
}

/// Names of all configuration keys.
pub fn key_names() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|k| k.name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(parse_config_str("", "x").unwrap(), Experiment::default());
        assert_eq!(parse_config_str("# nothing\n\n   \n", "x").unwrap(), Experiment::default());
    }

    #[test]
    fn comments_and_quotes() {
        let e = parse_config_str("meas.scheme = \"dispersive\" # probe\nmeas.lambda=0.04\n", "x").unwrap();
        assert_eq!(e.cycle.meas.scheme, Scheme::Dispersive);
        assert_eq!(e.cycle.meas.lambda, 0.04);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config_str("model.G = 0.2\nmodel.g = 0.1\n", "cfg").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cfg:2") && msg.contains("model.g"), "{msg}");
        assert_eq!(err.exit_code(), crate::error::exit::CONFIG);
    }

    #[test]
    fn repeated_key_is_an_error() {
        assert!(parse_config_str("stepper.dt = 0.005\nstepper.dt = 0.004\n", "x").is_err());
    }

    #[test]
    fn bad_value_reports_key() {
        let msg = parse_config_str("\ncycle.n_traj = many\n", "f").unwrap_err().to_string();
        assert!(msg.contains("f:2") && msg.contains("cycle.n_traj"), "{msg}");
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut entries = parse_document("meas.lambda = 0.01\n", "f").unwrap();
        merge(&mut entries, parse_overrides(&["meas.lambda=0.02".into()]).unwrap());
        let (e, _) = build(&entries).unwrap();
        assert_eq!(e.cycle.meas.lambda, 0.02);
    }

    #[test]
    fn emitted_config_parses_back() {
        let mut e = Experiment::default();
        e.cycle.stepper.dt = 4e-3;
        e.cycle.initial = InitialState::Fock(3);
        e.sweep.lambdas = vec![0.0, 0.005];
        assert_eq!(parse_config_str(&emit_config(&e), "x").unwrap(), e);
    }
}
