//! Non-Markovianity quantifiers for pure dephasing.
//!
//! For dephasing the optimal BLP pair is any pair of antipodal equatorial
//! states, whose trace distance is `sqrt(L)`. The BLP measure is therefore the
//! sum of `sqrt(L(b_n)) - sqrt(L(a_n))` over the growth intervals of the
//! echo. The concurrence-based measure is the total positive variation of
//! `C = sqrt(L)` and must agree with it; it is computed here by integrating
//! increments instead of pairing extrema. The Fisher-information flow is
//! `F' = -4 gamma L` with `F = L`.

use crate::dynamics::{derivative, RateSeries};
use crate::echo::DecoherenceSeries;
use crate::error::{EchoError, Result};
use crate::qubit::QubitState;
use crate::spectrum::{mode_spectrum, ChainConfig};

/// Echo differences at or below this are treated as flat.
pub const PLATEAU_TOL: f64 = 1e-14;
/// Default window as a fraction of the recurrence time.
pub const TRUNCATION_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthInterval {
    /// Local minimum of the echo.
    pub a: f64,
    /// Following local maximum (or the window end).
    pub b: f64,
    pub echo_a: f64,
    pub echo_b: f64,
}

impl GrowthInterval {
    pub fn increment(&self) -> f64 {
        self.echo_b.sqrt() - self.echo_a.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonMarkovianityReport {
    pub value: f64,
    pub intervals: Vec<GrowthInterval>,
    pub t_max: f64,
    pub n_grid_points: usize,
    /// Window runs past `0.9 T_rec`, where finite-size revivals set in.
    pub exceeds_recurrence_guard: bool,
}

impl NonMarkovianityReport {
    /// Flags the report if its window extends beyond `0.9 t_rec`.
    pub fn with_recurrence_guard(mut self, t_rec: f64) -> Self {
        self.exceeds_recurrence_guard = self.t_max > TRUNCATION_FRACTION * t_rec * (1.0 + 1e-12);
        self
    }
}

pub fn trace_distance(a: &QubitState, b: &QubitState) -> f64 {
    a.trace_distance(b)
}

/// Number of leading grid points inside `[t0, t_max]`.
fn window_len(series: &DecoherenceSeries, t_max: f64) -> Result<usize> {
    let grid = &series.grid;
    let slack = 1e-9 * grid.dt();
    if !(t_max.is_finite()) || t_max > grid.end() + slack {
        return Err(EchoError::Domain(format!(
            "t_max = {t_max} beyond the series end {}",
            grid.end()
        )));
    }
    let n = (((t_max - grid.t0()) + slack) / grid.dt()).floor();
    if n < 1.0 {
        return Err(EchoError::Domain(format!(
            "t_max = {t_max} leaves fewer than two grid points"
        )));
    }
    Ok((n as usize + 1).min(grid.len()))
}

/// Vertex of the parabola through three equally spaced samples, as
/// `(offset in steps from the middle sample, value)`.
fn parabolic_vertex(y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let den = y0 - 2.0 * y1 + y2;
    if den == 0.0 {
        return (0.0, y1);
    }
    let offset = (0.5 * (y0 - y2) / den).clamp(-1.0, 1.0);
    (offset, (y1 - 0.25 * (y0 - y2) * offset).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy)]
struct Extremum {
    kind: Kind,
    t: f64,
    echo: f64,
}

/// Local extrema of the echo on the window, in time order, including the
/// window ends. Flat runs collapse to their midpoint; isolated interior
/// extrema are refined by three-point parabolic interpolation.
fn extrema(series: &DecoherenceSeries, len: usize) -> Vec<Extremum> {
    let l = &series.echo[..len];
    let grid = &series.grid;
    // (first index, last index) of each flat run
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for j in 1..len {
        if (l[j] - l[j - 1]).abs() > PLATEAU_TOL {
            runs.push((start, j - 1));
            start = j;
        }
    }
    runs.push((start, len - 1));

    let level = |r: &(usize, usize)| l[r.0];
    let mid_time = |r: &(usize, usize)| 0.5 * (grid.time(r.0) + grid.time(r.1));
    let mut out = Vec::new();
    if runs.len() < 2 {
        return out;
    }

    let first = runs[0];
    let kind = if level(&runs[1]) > level(&first) {
        Kind::Min
    } else {
        Kind::Max
    };
    out.push(Extremum {
        kind,
        t: grid.time(0),
        echo: l[0],
    });

    for w in runs.windows(3) {
        let (prev, cur, next) = (level(&w[0]), level(&w[1]), level(&w[2]));
        let kind = if cur < prev && cur < next {
            Kind::Min
        } else if cur > prev && cur > next {
            Kind::Max
        } else {
            continue;
        };
        let r = w[1];
        let (t, echo) = if r.0 == r.1 {
            let j = r.0;
            let (offset, v) = parabolic_vertex(l[j - 1], l[j], l[j + 1]);
            (grid.time(j) + offset * grid.dt(), v)
        } else {
            (mid_time(&r), cur)
        };
        out.push(Extremum { kind, t, echo });
    }

    let last = runs[runs.len() - 1];
    if level(&last) > level(&runs[runs.len() - 2]) {
        out.push(Extremum {
            kind: Kind::Max,
            t: grid.time(len - 1),
            echo: l[len - 1],
        });
    }
    out
}

/// BLP measure on `[t0, t_max]` from the extrema of the echo.
pub fn blp_measure(series: &DecoherenceSeries, t_max: f64) -> Result<NonMarkovianityReport> {
    let len = window_len(series, t_max)?;
    let ext = extrema(series, len);
    let mut intervals = Vec::new();
    for pair in ext.windows(2) {
        if let [lo, hi] = pair {
            if lo.kind == Kind::Min && hi.kind == Kind::Max {
                let iv = GrowthInterval {
                    a: lo.t,
                    b: hi.t,
                    echo_a: lo.echo,
                    echo_b: hi.echo,
                };
                if iv.increment() > 0.0 {
                    intervals.push(iv);
                }
            }
        }
    }
    let value = intervals
        .iter()
        .map(GrowthInterval::increment)
        .fold(0.0, |acc, x| acc + x);
    Ok(NonMarkovianityReport {
        value,
        intervals,
        t_max: series.grid.time(len - 1),
        n_grid_points: len,
        exceeds_recurrence_guard: false,
    })
}

/// Concurrence-based measure: total positive variation of `C = sqrt(L)`.
///
/// Samples where the echo turns (strict sign change of neighboring
/// differences) are replaced by their parabolic vertex before the positive
/// increments are summed, so the grid bias matches the BLP extrema.
pub fn rhp_entanglement_measure(series: &DecoherenceSeries, t_max: f64) -> Result<f64> {
    let len = window_len(series, t_max)?;
    let l = &series.echo[..len];
    let sign = |d: f64| {
        if d.abs() <= PLATEAU_TOL {
            0
        } else if d > 0.0 {
            1
        } else {
            -1
        }
    };
    let concurrence: Vec<f64> = (0..len)
        .map(|j| {
            if j == 0 || j + 1 == len {
                return l[j].sqrt();
            }
            let (before, after) = (sign(l[j] - l[j - 1]), sign(l[j + 1] - l[j]));
            if before * after < 0 {
                parabolic_vertex(l[j - 1], l[j], l[j + 1]).1.sqrt()
            } else {
                l[j].sqrt()
            }
        })
        .collect();
    let mut total = 0.0;
    for (j, w) in concurrence.windows(2).enumerate() {
        if sign(l[j + 1] - l[j]) != 0 && w[1] > w[0] {
            total += w[1] - w[0];
        }
    }
    Ok(total)
}

/// Quantum Fisher information of the equatorial probe and its flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherSeries {
    pub grid: crate::echo::TimeGrid,
    pub fisher: Vec<f64>,
    pub flow: Vec<f64>,
}

pub fn fisher_flow(series: &DecoherenceSeries, rates: &RateSeries) -> Result<FisherSeries> {
    if series.grid != rates.grid || rates.gamma.len() != series.len() {
        return Err(EchoError::Domain(
            "echo series and rate series are on different grids".into(),
        ));
    }
    let flow = rates
        .gamma
        .iter()
        .zip(&series.echo)
        .map(|(g, l)| -4.0 * g * l)
        .collect();
    Ok(FisherSeries {
        grid: series.grid,
        fisher: series.echo.clone(),
        flow,
    })
}

/// `d/dt` of the squared trace distance of the optimal pair, which equals
/// `dL/dt`: `2 Re(conj(nu) nu')` when the analytic derivative is available,
/// central differences of `L` otherwise.
pub fn squared_distance_flow(series: &DecoherenceSeries) -> Vec<f64> {
    match &series.dnu {
        Some(dnu) => series
            .nu
            .iter()
            .zip(dnu)
            .map(|(nu, d)| 2.0 * (nu.conj() * d).re)
            .collect(),
        None => derivative(&series.echo, series.grid.dt()),
    }
}

/// Time for counter-propagating quasiparticle fronts to meet around the
/// ring, `N / (2 v_max)`, with the group velocity of the excited branch from
/// finite differences on the momentum grid.
pub fn recurrence_time(config: &ChainConfig) -> Result<f64> {
    let spectrum = mode_spectrum(config)?;
    let eps: Vec<f64> = spectrum.modes().iter().map(|m| m.eps_e).collect();
    let dk = 2.0 * std::f64::consts::PI / config.n_spins() as f64;
    let v_max = derivative(&eps, dk)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max);
    if v_max == 0.0 {
        return Err(EchoError::InvalidConfig(
            "flat dispersion, no recurrence".into(),
        ));
    }
    Ok(config.n_spins() as f64 / (2.0 * v_max))
}

/// Default truncation `0.9 T_rec`.
pub fn default_truncation(config: &ChainConfig) -> Result<f64> {
    Ok(TRUNCATION_FRACTION * recurrence_time(config)?)
}
