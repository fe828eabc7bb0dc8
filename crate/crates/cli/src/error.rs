use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Anything not covered below, including failed validation checks.
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INTEGRATOR: i32 = 3;
    pub const IO: i32 = 4;
}

/// Errors surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration text or value. `origin` is the file (or `--set`) and
    /// line the offending key came from, when known.
    #[error("{}{message}", location(.origin, .key))]
    Config {
        origin: Option<(String, usize)>,
        key: Option<String>,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] otto_core::Error),
}

fn location(origin: &Option<(String, usize)>, key: &Option<String>) -> String {
    match (origin, key) {
        (Some((src, 0)), Some(k)) => format!("{src}: key '{k}': "),
        (Some((src, line)), Some(k)) => format!("{src}:{line}: key '{k}': "),
        (Some((src, line)), None) => format!("{src}:{line}: "),
        (None, Some(k)) => format!("key '{k}': "),
        (None, None) => String::new(),
    }
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config {
            origin: None,
            key: None,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use otto_core::Error as E;
        match self {
            CliError::Config { .. } => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Core(E::Config(_) | E::Stability { .. } | E::Shape { .. }) => exit::CONFIG,
            CliError::Core(E::Integrator(_)) => exit::INTEGRATOR,
            CliError::Core(E::Domain(_)) => exit::OTHER,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
