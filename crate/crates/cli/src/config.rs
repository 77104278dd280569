//! Config file ingestion and flag merging.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use ising_echo::sweep::{ScanValues, SweepSpec, Truncation};
use ising_echo::EchoError;
use serde::Deserialize;

/// Mirror of [`SweepSpec`] with every field optional, plus an output path.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub coupling: Option<f64>,
    pub delta: Option<f64>,
    pub lambda_star: Option<ScanValues>,
    pub n_spins: Option<Vec<usize>>,
    pub dt: Option<f64>,
    pub t_max: Option<Truncation>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Exchange coupling J.
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Qubit-ring coupling delta.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Renormalized field values, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "lambda_range")]
    pub lambda_star: Option<Vec<f64>>,
    /// Inclusive field range as MIN,MAX,STEP.
    #[arg(long, value_delimiter = ',')]
    pub lambda_range: Option<Vec<f64>>,
    /// Ring sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n_spins: Option<Vec<usize>>,
    /// Time step (default: half the Nyquist bound).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Window end: "auto" or a time.
    #[arg(long)]
    pub t_max: Option<Truncation>,
}

impl ModelArgs {
    fn scan(&self) -> Result<Option<ScanValues>> {
        if let Some(v) = &self.lambda_star {
            return Ok(Some(ScanValues::List(v.clone())));
        }
        match self.lambda_range.as_deref() {
            None => Ok(None),
            Some(&[min, max, step]) => Ok(Some(ScanValues::Range { min, max, step })),
            Some(r) => bail!(EchoError::InvalidConfig(format!(
                "--lambda-range takes MIN,MAX,STEP, got {} values",
                r.len()
            ))),
        }
    }

    /// Flags over file values over the given defaults.
    pub fn merge(
        &self,
        file: &FileConfig,
        lambda_star: ScanValues,
        n_spins: Vec<usize>,
        t_max: Truncation,
    ) -> Result<SweepSpec> {
        Ok(SweepSpec {
            coupling: self.coupling.or(file.coupling).unwrap_or(1.0),
            delta: self.delta.or(file.delta).unwrap_or(0.01),
            lambda_star: self
                .scan()?
                .or_else(|| file.lambda_star.clone())
                .unwrap_or(lambda_star),
            n_spins: self
                .n_spins
                .clone()
                .or_else(|| file.n_spins.clone())
                .unwrap_or(n_spins),
            dt: self.dt.or(file.dt),
            t_max: self.t_max.or(file.t_max).unwrap_or(t_max),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str(
            "delta = 0.05\nn_spins = [100]\nt_max = 30.0\n\n[lambda_star]\nmin = 0.5\nmax = 1.5\nstep = 0.5\n",
        )
        .unwrap();
        let args = ModelArgs {
            n_spins: Some(vec![200]),
            ..Default::default()
        };
        let spec = args
            .merge(
                &file,
                ScanValues::List(vec![1.0]),
                vec![8],
                Truncation::Auto,
            )
            .unwrap();
        assert_eq!(spec.coupling, 1.0);
        assert_eq!(spec.delta, 0.05);
        assert_eq!(spec.n_spins, vec![200]);
        assert_eq!(spec.t_max, Truncation::Time(30.0));
        assert_eq!(spec.lambda_star.values().unwrap(), vec![0.5, 1.0, 1.5]);
    }

    #[test]
    fn range_needs_three_values() {
        let args = ModelArgs {
            lambda_range: Some(vec![0.5, 1.5]),
            ..Default::default()
        };
        let file = FileConfig::default();
        assert!(args
            .merge(
                &file,
                ScanValues::List(vec![1.0]),
                vec![8],
                Truncation::Auto
            )
            .is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("lambda = 0.3").is_err());
    }
}
