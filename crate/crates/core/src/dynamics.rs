//! Time-local master equation for the dephased qubit,
//!
//! ```text
//! d rho/dt = i Lambda(t) [sigma_z, rho] + gamma(t) (sigma_z rho sigma_z - rho)
//! gamma = -L'/(4L),   Lambda = -phi'/2
//! ```
//!
//! The rate comes from the analytic mode sum for `L'/L`; the Lamb shift from
//! the analytic `nu'/nu` when the series carries it, otherwise from central
//! differences of the unwrapped phase.

use num_complex::Complex64;

use crate::echo::{pairs, pairs_factor_and_derivative, DecoherenceSeries, TimeGrid};
use crate::error::{EchoError, Result};
use crate::exec::Execution;
use crate::qubit::{Matrix2, QubitState};
use crate::spectrum::ModeSpectrum;

/// Mode factors below this make `-L'/(4L)` singular.
pub const SINGULAR_FACTOR: f64 = 1e-12;
/// Magnitude reported for the rate at singular points.
pub const RATE_CLAMP: f64 = 1e6;

/// `gamma(t)` from the analytic logarithmic derivative; the flag is set when
/// some mode factor drops below [`SINGULAR_FACTOR`] and the value is clamped.
pub fn rate_at(spectrum: &ModeSpectrum, t: f64) -> (f64, bool) {
    let mut dlog = 0.0;
    let mut singular = false;
    for m in spectrum.modes() {
        let w = m.weight();
        let (s, c) = (m.eps_e * t).sin_cos();
        let factor = 1.0 - w * s * s;
        if factor < SINGULAR_FACTOR {
            singular = true;
            continue;
        }
        // d/dt log(1 - w sin^2(eps t)) = -w eps sin(2 eps t) / factor
        dlog -= w * m.eps_e * 2.0 * s * c / factor;
    }
    if singular {
        let sign = if dlog > 0.0 { -1.0 } else { 1.0 };
        (sign * RATE_CLAMP, true)
    } else {
        (-0.25 * dlog, false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DephasingRate {
    pub gamma: Vec<f64>,
    pub singular: Vec<bool>,
}

pub fn dephasing_rate(series: &DecoherenceSeries, spectrum: &ModeSpectrum) -> DephasingRate {
    dephasing_rate_with(series, spectrum, Execution::default())
}

pub fn dephasing_rate_with(
    series: &DecoherenceSeries,
    spectrum: &ModeSpectrum,
    exec: Execution,
) -> DephasingRate {
    let grid = series.grid;
    let pts = exec.map(grid.len(), |i| rate_at(spectrum, grid.time(i)));
    DephasingRate {
        gamma: pts.iter().map(|p| p.0).collect(),
        singular: pts.iter().map(|p| p.1).collect(),
    }
}

/// Second-order central differences, second-order one-sided at the ends.
pub(crate) fn derivative(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        let d = (values[n - 1] - values[0]) / ((n - 1) as f64 * dt);
        return vec![d; n];
    }
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt));
    for w in values.windows(3) {
        out.push((w[2] - w[0]) / (2.0 * dt));
    }
    out.push((3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dt));
    out
}

fn shift_from_factor(nu: Complex64, dnu: Complex64) -> f64 {
    if nu.norm_sqr() == 0.0 {
        0.0
    } else {
        -0.5 * (dnu / nu).im
    }
}

/// `Lambda = -phi'/2` on the series grid.
pub fn lamb_shift(series: &DecoherenceSeries) -> Vec<f64> {
    match &series.dnu {
        Some(dnu) => series
            .nu
            .iter()
            .zip(dnu)
            .map(|(&nu, &d)| shift_from_factor(nu, d))
            .collect(),
        None => derivative(&series.phase, series.grid.dt())
            .into_iter()
            .map(|d| -0.5 * d)
            .collect(),
    }
}

/// Master-equation coefficients on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub grid: TimeGrid,
    pub gamma: Vec<f64>,
    pub lamb: Vec<f64>,
    pub singular: Vec<bool>,
    /// Exact `(gamma, Lambda)` at the half-steps `t_i + dt/2`, when available.
    pub midpoints: Option<Vec<(f64, f64)>>,
}

impl RateSeries {
    /// Rates at the start, middle and end of step `i`. The middle value is
    /// exact when midpoints are stored, linearly interpolated otherwise.
    fn step(&self, i: usize) -> [(f64, f64); 3] {
        let a = (self.gamma[i], self.lamb[i]);
        let b = (self.gamma[i + 1], self.lamb[i + 1]);
        let mid = match &self.midpoints {
            Some(m) => m[i],
            None => (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1)),
        };
        [a, mid, b]
    }

    pub fn min_gamma(&self) -> f64 {
        self.gamma
            .iter()
            .zip(&self.singular)
            .filter(|(_, s)| !**s)
            .map(|(g, _)| *g)
            .fold(f64::INFINITY, f64::min)
            + 0.0 // -0.0 at a vanishing rate prints as 0
    }
}

/// Rates for a spectrum-driven series, including exact half-step values.
pub fn rate_series(series: &DecoherenceSeries, spectrum: &ModeSpectrum) -> RateSeries {
    rate_series_with(series, spectrum, Execution::default())
}

pub fn rate_series_with(
    series: &DecoherenceSeries,
    spectrum: &ModeSpectrum,
    exec: Execution,
) -> RateSeries {
    let grid = series.grid;
    let DephasingRate { gamma, singular } = dephasing_rate_with(series, spectrum, exec);
    let table = pairs(spectrum);
    let midpoints = exec.map(grid.len() - 1, |i| {
        let t = grid.time(i) + 0.5 * grid.dt();
        let (nu, dnu) = pairs_factor_and_derivative(&table, t);
        (rate_at(spectrum, t).0, shift_from_factor(nu, dnu))
    });
    RateSeries {
        grid,
        gamma,
        lamb: lamb_shift(series),
        singular,
        midpoints: Some(midpoints),
    }
}

/// Coefficient `kappa` of `d rho_rc/dt = kappa rho_rc`, with
/// `sigma_z = diag(1, -1)` in the `(g, e)` basis.
fn element_rate(r: usize, c: usize, gamma: f64, lamb: f64) -> Complex64 {
    const SZ: [f64; 2] = [1.0, -1.0];
    Complex64::new(gamma * (SZ[r] * SZ[c] - 1.0), lamb * (SZ[r] - SZ[c]))
}

/// Integrates the master equation on the rate grid, one state per grid point.
///
/// The generators at different times commute, so each step applies
/// `exp(dt/6 (K(t) + 4 K(t + dt/2) + K(t + dt)))` elementwise; this is exact
/// for the Lamb-shift drift and fourth order in the time variation of the
/// rates.
pub fn evolve_master_equation(initial: &QubitState, rates: &RateSeries) -> Result<Vec<QubitState>> {
    if !initial.is_physical(1e-12) {
        return Err(EchoError::Unphysical(
            "initial state is not a density matrix".into(),
        ));
    }
    let n = rates.grid.len();
    if rates.gamma.len() != n || rates.lamb.len() != n {
        return Err(EchoError::InvalidGrid(
            "rate arrays do not match the grid".into(),
        ));
    }
    let dt = rates.grid.dt();
    let mut out = Vec::with_capacity(n);
    let mut rho: Matrix2 = *initial.matrix();
    out.push(*initial);
    for i in 0..n - 1 {
        let [a, m, b] = rates.step(i);
        for r in 0..2 {
            for c in 0..2 {
                let k = element_rate(r, c, a.0, a.1)
                    + element_rate(r, c, m.0, m.1) * 4.0
                    + element_rate(r, c, b.0, b.1);
                rho[r][c] *= (k * (dt / 6.0)).exp();
            }
        }
        let state = QubitState::from_matrix(rho);
        if !state.is_physical(1e-9) {
            return Err(EchoError::Integration {
                t: rates.grid.time(i + 1),
                reason: format!("Bloch vector {:?} left the unit ball", state.bloch()),
            });
        }
        out.push(state);
    }
    Ok(out)
}

/// `exp(-2 int_0^t gamma ds)` on the grid, by composite Simpson quadrature
/// with the analytic rate evaluated at the half-steps.
pub fn decay_envelope(spectrum: &ModeSpectrum, grid: &TimeGrid) -> Vec<f64> {
    let dt = grid.dt();
    let mut integral = 0.0_f64;
    let mut out = Vec::with_capacity(grid.len());
    let mut prev = rate_at(spectrum, grid.time(0)).0;
    out.push((-2.0 * integral).exp());
    for i in 0..grid.len() - 1 {
        let mid = rate_at(spectrum, grid.time(i) + 0.5 * dt).0;
        let next = rate_at(spectrum, grid.time(i + 1)).0;
        integral += dt / 6.0 * (prev + 4.0 * mid + next);
        out.push((-2.0 * integral).exp());
        prev = next;
    }
    out
}
