use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EchoError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time step {dt} exceeds the resolution bound {bound} (pi / (10 * max quasiparticle energy))")]
    GridTooCoarse { dt: f64, bound: f64 },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("master-equation integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("no lambda* scan found for n_spins = {0}")]
    NotFound(usize),

    #[error("ambiguous minimum: {} tied lambda* values {:?}", .0.len(), .0)]
    Ambiguous(Vec<f64>),

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl EchoError {
    /// Short machine-readable tag, used by the CLI error summary.
    pub fn kind(&self) -> &'static str {
        match self {
            EchoError::InvalidConfig(_) => "invalid_config",
            EchoError::InvalidGrid(_) | EchoError::GridTooCoarse { .. } => "invalid_grid",
            EchoError::Domain(_) => "domain",
            EchoError::Unphysical(_) => "unphysical",
            EchoError::Integration { .. } => "integration",
            EchoError::Resource(_) => "resource",
            EchoError::NotFound(_) => "not_found",
            EchoError::Ambiguous(_) => "ambiguous",
            EchoError::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, EchoError>;
