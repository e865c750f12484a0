use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("configuration rejected with {} error(s):\n  {}", .0.len(), .0.join("\n  "))]
    ConfigList(Vec<String>),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("non-finite value encountered at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("imaginary-time relaxation did not converge after {iterations} iterations (last |dE| = {last_delta:e})")]
    NotConverged { iterations: usize, last_delta: f64 },

    #[error("wavefunction norm {0:e} is below 1e-12; the system is fully ionized")]
    Ionized(f64),

    #[error("observable `{0}` is not available for this trajectory")]
    UnsupportedObservable(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for configuration/input validation failures (as opposed to numerical ones).
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::ConfigList(_) | Error::Parse(_) | Error::Domain(_))
    }

    /// True for failures of the numerics themselves.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eigen(_) | Error::NonFinite { .. } | Error::NotConverged { .. } | Error::Ionized(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
