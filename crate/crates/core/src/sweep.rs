//! Parameter sweeps over `(N, lambda*)`, critical-point detection and CSV
//! output.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{rate_series_with, RateSeries};
use crate::echo::{default_step, spectrum_series, DecoherenceSeries, TimeGrid};
use crate::error::{EchoError, Result};
use crate::exec::Execution;
use crate::measures::{
    blp_measure, fisher_flow, recurrence_time, NonMarkovianityReport, TRUNCATION_FRACTION,
};
use crate::oracle::oracle_echo;
use crate::spectrum::{mode_spectrum, ChainConfig, ModeSpectrum};

/// Blp values below this are reported as exactly Markovian.
pub const MARKOVIAN_THRESHOLD: f64 = 1e-10;

/// Window over which the measure is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "TruncationRepr", into = "TruncationRepr")]
pub enum Truncation {
    /// `0.9 T_rec`.
    #[default]
    Auto,
    Time(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TruncationRepr {
    Keyword(String),
    Time(f64),
}

impl TryFrom<TruncationRepr> for Truncation {
    type Error = String;

    fn try_from(r: TruncationRepr) -> std::result::Result<Self, String> {
        match r {
            TruncationRepr::Keyword(s) => s.parse(),
            TruncationRepr::Time(t) if t.is_finite() && t > 0.0 => Ok(Truncation::Time(t)),
            TruncationRepr::Time(t) => Err(format!("t_max must be positive, got {t}")),
        }
    }
}

impl From<Truncation> for TruncationRepr {
    fn from(t: Truncation) -> Self {
        match t {
            Truncation::Auto => TruncationRepr::Keyword("auto".into()),
            Truncation::Time(t) => TruncationRepr::Time(t),
        }
    }
}

impl FromStr for Truncation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Truncation::Auto);
        }
        match s.parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(Truncation::Time(t)),
            _ => Err(format!("expected \"auto\" or a positive time, got {s:?}")),
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Auto => f.write_str("auto"),
            Truncation::Time(t) => write!(f, "{t}"),
        }
    }
}

impl Truncation {
    pub fn resolve(&self, config: &ChainConfig) -> Result<f64> {
        match *self {
            Truncation::Auto => Ok(TRUNCATION_FRACTION * recurrence_time(config)?),
            Truncation::Time(t) => Ok(t),
        }
    }
}

/// Field values given either explicitly or as an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScanValues {
    List(Vec<f64>),
    Range { min: f64, max: f64, step: f64 },
}

impl ScanValues {
    /// Expanded values; range points are rounded to 12 decimals so that
    /// decimal steps land on exact values such as `1.0`.
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            ScanValues::List(v) => Ok(v.clone()),
            &ScanValues::Range { min, max, step } => {
                if !(step > 0.0 && max >= min && min.is_finite() && max.is_finite()) {
                    return Err(EchoError::InvalidConfig(format!(
                        "bad range min={min} max={max} step={step}"
                    )));
                }
                let n = ((max - min) / step + 1e-9).floor() as usize;
                Ok((0..=n)
                    .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
                    .collect())
            }
        }
    }
}

/// Description of a `(N, lambda*)` landscape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub lambda_star: ScanValues,
    pub n_spins: Vec<usize>,
    /// Time step; half the Nyquist bound of each cell when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_max: Truncation,
}

pub fn default_coupling() -> f64 {
    1.0
}

pub fn default_delta() -> f64 {
    0.01
}

impl SweepSpec {
    /// Cells in N-major, lambda*-minor order; every configuration validated.
    pub fn cells(&self) -> Result<Vec<ChainConfig>> {
        let fields = self.lambda_star.values()?;
        if fields.is_empty() || self.n_spins.is_empty() {
            return Err(EchoError::InvalidConfig(
                "empty lambda* or n_spins list".into(),
            ));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(EchoError::InvalidGrid(format!("dt must be > 0, got {dt}")));
            }
        }
        let mut cells = Vec::with_capacity(fields.len() * self.n_spins.len());
        for &n in &self.n_spins {
            for &ls in &fields {
                cells.push(ChainConfig::with_lambda_star(
                    self.coupling,
                    ls,
                    self.delta,
                    n,
                )?);
            }
        }
        Ok(cells)
    }
}

/// Everything computed for one configuration.
#[derive(Debug, Clone)]
pub struct CellAnalysis {
    pub spectrum: ModeSpectrum,
    pub series: DecoherenceSeries,
    pub rates: RateSeries,
    pub report: NonMarkovianityReport,
    pub recurrence_time: f64,
}

/// Grid on `[0, t_max]` with the requested step, or half the Nyquist bound.
pub fn window_grid(spectrum: &ModeSpectrum, t_max: f64, dt: Option<f64>) -> Result<TimeGrid> {
    TimeGrid::covering(t_max, dt.unwrap_or_else(|| default_step(spectrum)))
}

pub fn analyze(
    config: &ChainConfig,
    truncation: Truncation,
    dt: Option<f64>,
    exec: Execution,
) -> Result<CellAnalysis> {
    let spectrum = mode_spectrum(config)?;
    let t_rec = recurrence_time(config)?;
    let t_max = truncation.resolve(config)?;
    let grid = window_grid(&spectrum, t_max, dt)?;
    analyze_on(&spectrum, &grid, t_rec, exec)
}

pub fn analyze_on(
    spectrum: &ModeSpectrum,
    grid: &TimeGrid,
    t_rec: f64,
    exec: Execution,
) -> Result<CellAnalysis> {
    let series = spectrum_series(spectrum, grid, exec)?;
    let rates = rate_series_with(&series, spectrum, exec);
    let report = blp_measure(&series, grid.end())?.with_recurrence_guard(t_rec);
    Ok(CellAnalysis {
        spectrum: spectrum.clone(),
        series,
        rates,
        report,
        recurrence_time: t_rec,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_spins: usize,
    pub lambda_star: f64,
    pub blp: f64,
    pub t_max: f64,
    pub n_intervals: usize,
    pub min_gamma: f64,
    pub runtime_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

fn run_cell(config: &ChainConfig, spec: &SweepSpec, exec: Execution) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        n_spins: config.n_spins(),
        lambda_star: config.lambda_star(),
        blp: f64::NAN,
        t_max: f64::NAN,
        n_intervals: 0,
        min_gamma: f64::NAN,
        runtime_ms: 0.0,
        error: None,
    };
    match analyze(config, spec.t_max, spec.dt, exec) {
        Ok(cell) => {
            row.blp = cell.report.value;
            row.t_max = cell.report.t_max;
            row.n_intervals = cell.report.intervals.len();
            row.min_gamma = cell.rates.min_gamma();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

/// Runs every cell; failures land in the row's error field.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    let cells = spec.cells()?;
    let rows = exec.map(cells.len(), |i| run_cell(&cells[i], spec, exec));
    Ok(SweepResult { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub lambda_star: f64,
    pub blp: f64,
    /// Minimum below [`MARKOVIAN_THRESHOLD`].
    pub markovian: bool,
}

/// Field value minimizing the measure along the scan for `n_spins`.
pub fn detect_critical_point(result: &SweepResult, n_spins: usize) -> Result<CriticalPoint> {
    let scan: Vec<&SweepRow> = result
        .rows
        .iter()
        .filter(|r| r.n_spins == n_spins && r.error.is_none())
        .collect();
    if scan.is_empty() {
        return Err(EchoError::NotFound(n_spins));
    }
    if scan.len() < 3 {
        return Err(EchoError::Domain(format!(
            "need at least 3 scan points for n_spins = {n_spins}, got {}",
            scan.len()
        )));
    }
    let min = scan.iter().map(|r| r.blp).fold(f64::INFINITY, f64::min);
    let tied: Vec<&SweepRow> = scan
        .iter()
        .copied()
        .filter(|r| r.blp - min <= MARKOVIAN_THRESHOLD)
        .collect();
    if tied.len() > 1 {
        return Err(EchoError::Ambiguous(
            tied.iter().map(|r| r.lambda_star).collect(),
        ));
    }
    Ok(CriticalPoint {
        lambda_star: tied[0].lambda_star,
        blp: min,
        markovian: min < MARKOVIAN_THRESHOLD,
    })
}

/// Seventeen significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const SWEEP_HEADER: &str = "n_spins,lambda_star,blp,t_max,n_intervals,min_gamma,error";
pub const SERIES_HEADER: &str = "t,re_nu,im_nu,L,phi,gamma,lamb,fisher_flow";
pub const ORACLE_HEADER: &str =
    "t,L_qp,L_oracle,re_nu_qp,im_nu_qp,re_nu_oracle,im_nu_oracle,abs_dL";

pub fn write_sweep_csv<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n_spins,
            fmt_f64(r.lambda_star),
            fmt_f64(r.blp),
            fmt_f64(r.t_max),
            r.n_intervals,
            fmt_f64(r.min_gamma),
            csv_field(r.error.as_deref().unwrap_or("")),
        )?;
    }
    out.flush()
}

pub fn write_series_csv<W: Write>(cell: &CellAnalysis, mut out: W) -> std::io::Result<()> {
    let fisher = fisher_flow(&cell.series, &cell.rates)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    writeln!(out, "{SERIES_HEADER}")?;
    let s = &cell.series;
    for i in 0..s.len() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(s.grid.time(i)),
            fmt_f64(s.nu[i].re),
            fmt_f64(s.nu[i].im),
            fmt_f64(s.echo[i]),
            fmt_f64(s.phase[i]),
            fmt_f64(cell.rates.gamma[i]),
            fmt_f64(cell.rates.lamb[i]),
            fmt_f64(fisher.flow[i]),
        )?;
    }
    out.flush()
}

/// Writes the paired quasiparticle/oracle table and returns `max |dL|`.
pub fn write_oracle_csv<W: Write>(
    qp: &DecoherenceSeries,
    oracle: &DecoherenceSeries,
    mut out: W,
) -> std::io::Result<f64> {
    writeln!(out, "{ORACLE_HEADER}")?;
    let mut max_dl = 0.0f64;
    for i in 0..qp.len() {
        let dl = (qp.echo[i] - oracle.echo[i]).abs();
        max_dl = max_dl.max(dl);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(qp.grid.time(i)),
            fmt_f64(qp.echo[i]),
            fmt_f64(oracle.echo[i]),
            fmt_f64(qp.nu[i].re),
            fmt_f64(qp.nu[i].im),
            fmt_f64(oracle.nu[i].re),
            fmt_f64(oracle.nu[i].im),
            fmt_f64(dl),
        )?;
    }
    out.flush()?;
    Ok(max_dl)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| EchoError::Io {
            path: path.to_path_buf(),
            source,
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPaths {
    pub series: PathBuf,
    /// Paired quasiparticle/oracle table (small rings only).
    pub oracle: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct SeriesOutput {
    pub cell: CellAnalysis,
    pub oracle_max_dl: Option<f64>,
}

/// Computes one configuration on `grid` and writes its CSV files. Output
/// files are opened before any computation, so unwritable paths fail fast.
pub fn emit_series(
    config: &ChainConfig,
    grid: &TimeGrid,
    paths: &SeriesPaths,
    exec: Execution,
) -> Result<SeriesOutput> {
    let series_out = create(&paths.series)?;
    let oracle_out = paths.oracle.as_deref().map(create).transpose()?;

    let spectrum = mode_spectrum(config)?;
    let t_rec = recurrence_time(config)?;
    let cell = analyze_on(&spectrum, grid, t_rec, exec)?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| EchoError::Io { path, source }
    };
    write_series_csv(&cell, series_out).map_err(io(&paths.series))?;

    let oracle_max_dl = match (oracle_out, &paths.oracle) {
        (Some(out), Some(path)) => {
            let oracle = oracle_echo(
                config.n_spins(),
                config.lambda(),
                config.delta(),
                config.coupling(),
                grid,
            )?;
            Some(write_oracle_csv(&cell.series, &oracle, out).map_err(io(path))?)
        }
        _ => None,
    };
    Ok(SeriesOutput {
        cell,
        oracle_max_dl,
    })
}
