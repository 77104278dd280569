//! Decoherence factor, Loschmidt echo and the exact reduced qubit state.
//!
//! Two independent routes give the echo. [`loschmidt_echo`] evaluates the
//! closed-form product `prod_k [1 - sin^2(2 alpha_k) sin^2(eps_k^e t)]` in log
//! space. [`decoherence_factor`] evolves the ground-branch pair state of every
//! `(k, -k)` block under both branch Hamiltonians with explicit 2x2
//! propagators and multiplies the complex overlaps; its squared modulus must
//! agree with the product formula.

use num_complex::Complex64;

use crate::error::{EchoError, Result};
use crate::exec::Execution;
use crate::qubit::QubitState;
use crate::spectrum::{mode_spectrum, ChainConfig, Mode, ModeSpectrum};

/// Uniform time grid `t_i = t0 + i dt`, `i = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_points: usize) -> Result<Self> {
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(EchoError::InvalidGrid(format!("t0 must be >= 0, got {t0}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(EchoError::InvalidGrid(format!("dt must be > 0, got {dt}")));
        }
        if n_points < 2 {
            return Err(EchoError::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        Ok(TimeGrid { t0, dt, n_points })
    }

    /// Grid on `[0, t_end]` whose last point is exactly `t_end` and whose
    /// step does not exceed `max_dt`.
    pub fn covering(t_end: f64, max_dt: f64) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(EchoError::InvalidGrid(format!(
                "window end must be > 0, got {t_end}"
            )));
        }
        if !(max_dt.is_finite() && max_dt > 0.0) {
            return Err(EchoError::InvalidGrid(format!(
                "dt must be > 0, got {max_dt}"
            )));
        }
        let steps = (t_end / max_dt).ceil().max(1.0) as usize;
        Self::new(0.0, t_end / steps as f64, steps + 1)
    }

    /// Same span with twice the resolution.
    pub fn refined(&self) -> Self {
        TimeGrid {
            t0: self.t0,
            dt: 0.5 * self.dt,
            n_points: 2 * (self.n_points - 1) + 1,
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.n_points - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.time(i))
    }
}

/// Largest admissible step, `pi / (10 max_k eps_k^e)`.
pub fn nyquist_bound(spectrum: &ModeSpectrum) -> f64 {
    let e = spectrum.max_eps_e();
    if e > 0.0 {
        std::f64::consts::PI / (10.0 * e)
    } else {
        f64::INFINITY
    }
}

/// Step used when none is requested: half the Nyquist bound. At the bound
/// itself the parabolic extremum refinement still moves the measure by
/// ~1e-6 under grid halving.
pub fn default_step(spectrum: &ModeSpectrum) -> f64 {
    0.5 * nyquist_bound(spectrum)
}

pub fn check_grid(spectrum: &ModeSpectrum, grid: &TimeGrid) -> Result<()> {
    let bound = nyquist_bound(spectrum);
    if grid.dt() > bound * (1.0 + 1e-12) {
        return Err(EchoError::GridTooCoarse {
            dt: grid.dt(),
            bound,
        });
    }
    Ok(())
}

/// Closed-form echo `prod_k [1 - sin^2(2 alpha_k) sin^2(eps_k^e t)]`,
/// accumulated as a sum of logarithms.
pub fn loschmidt_echo(spectrum: &ModeSpectrum, t: f64) -> f64 {
    let mut log_sum = 0.0;
    for m in spectrum.modes() {
        let s = (m.eps_e * t).sin();
        let x = m.weight() * s * s;
        if x >= 1.0 {
            return 0.0;
        }
        log_sum += (-x).ln_1p();
    }
    log_sum.exp()
}

/// Unit vector `(0, sin 2theta, cos 2theta)` of the pair Hamiltonian
/// `h = -eps (n . tau)` in the basis `{|0>, c+_k c+_-k |0>}`.
#[derive(Clone, Copy)]
struct PairBlock {
    eps: f64,
    cos2: f64,
    sin2: f64,
}

impl PairBlock {
    fn new(eps: f64, theta: f64) -> Self {
        let (sin2, cos2) = (2.0 * theta).sin_cos();
        PairBlock { eps, cos2, sin2 }
    }

    /// `(n . tau) v`.
    fn axis_apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let i = Complex64::i();
        [
            v[0] * self.cos2 - i * self.sin2 * v[1],
            i * self.sin2 * v[0] - v[1] * self.cos2,
        ]
    }

    /// `h v = -eps (n . tau) v`.
    fn hamiltonian_apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let w = self.axis_apply(v);
        [w[0] * -self.eps, w[1] * -self.eps]
    }

    /// `exp(-i h t) v = cos(eps t) v + i sin(eps t) (n . tau) v`.
    fn propagate(&self, v: [Complex64; 2], t: f64) -> [Complex64; 2] {
        let (s, c) = (self.eps * t).sin_cos();
        let w = self.axis_apply(v);
        let is = Complex64::new(0.0, s);
        [v[0] * c + is * w[0], v[1] * c + is * w[1]]
    }
}

fn inner(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Per-mode constants of the pair propagators.
#[derive(Clone, Copy)]
pub(crate) struct Pair {
    g: PairBlock,
    e: PairBlock,
    ground: [Complex64; 2],
    weight: f64,
}

impl Pair {
    fn new(m: &Mode) -> Self {
        let (st, ct) = m.theta_g.sin_cos();
        Pair {
            g: PairBlock::new(m.eps_g, m.theta_g),
            e: PairBlock::new(m.eps_e, m.theta_e),
            ground: [Complex64::new(ct, 0.0), Complex64::new(0.0, st)],
            weight: m.weight(),
        }
    }

    fn factor(&self, t: f64) -> Complex64 {
        inner(
            self.g.propagate(self.ground, t),
            self.e.propagate(self.ground, t),
        )
    }

    /// `nu_k = <G_g| U_g^+ U_e |G_g>` and `nu_k' = i <psi_g|(h_g - h_e)|psi_e>`.
    fn factor_and_derivative(&self, t: f64) -> (Complex64, Complex64) {
        let psi_g = self.g.propagate(self.ground, t);
        let psi_e = self.e.propagate(self.ground, t);
        let hg = self.g.hamiltonian_apply(psi_e);
        let he = self.e.hamiltonian_apply(psi_e);
        let diff = [hg[0] - he[0], hg[1] - he[1]];
        (inner(psi_g, psi_e), Complex64::i() * inner(psi_g, diff))
    }
}

pub(crate) fn pairs(spectrum: &ModeSpectrum) -> Vec<Pair> {
    spectrum.modes().iter().map(Pair::new).collect()
}

/// Complex decoherence factor from the 2x2 pair propagators.
pub fn decoherence_factor(spectrum: &ModeSpectrum, t: f64) -> Complex64 {
    pairs(spectrum)
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, p| acc * p.factor(t))
}

/// `(nu(t), nu'(t))`, with the derivative accumulated by the product rule.
pub fn factor_and_derivative(spectrum: &ModeSpectrum, t: f64) -> (Complex64, Complex64) {
    pairs_factor_and_derivative(&pairs(spectrum), t)
}

pub(crate) fn pairs_factor_and_derivative(pairs: &[Pair], t: f64) -> (Complex64, Complex64) {
    let mut prod = Complex64::new(1.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for p in pairs {
        let (nu, dnu) = p.factor_and_derivative(t);
        deriv = deriv * nu + prod * dnu;
        prod *= nu;
    }
    (prod, deriv)
}

/// Time series of the decoherence factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceSeries {
    pub grid: TimeGrid,
    pub nu: Vec<Complex64>,
    pub echo: Vec<f64>,
    /// Unwrapped phase of `nu`.
    pub phase: Vec<f64>,
    /// Analytic `d nu / dt`, present for series built from a spectrum.
    pub dnu: Option<Vec<Complex64>>,
}

impl DecoherenceSeries {
    /// Series from sampled complex factors; `L = |nu|^2` and the phase is
    /// unwrapped by nearest-branch increments.
    pub fn from_factors(grid: TimeGrid, nu: Vec<Complex64>) -> Result<Self> {
        if nu.len() != grid.len() {
            return Err(EchoError::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                nu.len(),
                grid.len()
            )));
        }
        let echo = nu.iter().map(|z| z.norm_sqr()).collect();
        let mut phase = Vec::with_capacity(nu.len());
        let mut acc = nu[0].arg();
        phase.push(acc);
        for w in nu.windows(2) {
            acc += (w[1] * w[0].conj()).arg();
            phase.push(acc);
        }
        Ok(DecoherenceSeries {
            grid,
            nu,
            echo,
            phase,
            dnu: None,
        })
    }

    /// Real, non-negative factor `nu = sqrt(L)` from echo samples.
    pub fn from_echo(grid: TimeGrid, echo: Vec<f64>) -> Result<Self> {
        if let Some(bad) = echo.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(EchoError::Domain(format!(
                "echo value {bad} outside [0, 1]"
            )));
        }
        let nu = echo.iter().map(|l| Complex64::new(l.sqrt(), 0.0)).collect();
        let mut s = Self::from_factors(grid, nu)?;
        s.echo = echo;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// Per-point values of a spectrum-driven series, before phase accumulation.
struct Sample {
    nu: Complex64,
    dnu: Complex64,
    echo: f64,
    dphase: f64,
}

pub fn echo_series(config: &ChainConfig, grid: &TimeGrid) -> Result<DecoherenceSeries> {
    echo_series_with(config, grid, Execution::default())
}

pub fn echo_series_with(
    config: &ChainConfig,
    grid: &TimeGrid,
    exec: Execution,
) -> Result<DecoherenceSeries> {
    let spectrum = mode_spectrum(config)?;
    spectrum_series(&spectrum, grid, exec)
}

/// All per-point quantities in one pass over the modes. The phase advance
/// from `t_prev` sums the nearest-branch increment of each pair factor.
fn sample(pairs: &[Pair], t_prev: Option<f64>, t: f64) -> Sample {
    let mut nu = Complex64::new(1.0, 0.0);
    let mut dnu = Complex64::new(0.0, 0.0);
    let mut log_echo = 0.0;
    let mut dphase = 0.0;
    for p in pairs {
        let (f, df) = p.factor_and_derivative(t);
        dnu = dnu * f + nu * df;
        nu *= f;
        let s = (p.e.eps * t).sin();
        let x = p.weight * s * s;
        log_echo += if x >= 1.0 {
            f64::NEG_INFINITY
        } else {
            (-x).ln_1p()
        };
        if let Some(tp) = t_prev {
            dphase += (f * p.factor(tp).conj()).arg();
        }
    }
    if t_prev.is_none() {
        dphase = nu.arg();
    }
    Sample {
        nu,
        dnu,
        echo: log_echo.exp(),
        dphase,
    }
}

/// Series for an already built spectrum. Time points are independent; each
/// point reduces over modes in grid order, so the result does not depend on
/// the thread count.
pub fn spectrum_series(
    spectrum: &ModeSpectrum,
    grid: &TimeGrid,
    exec: Execution,
) -> Result<DecoherenceSeries> {
    check_grid(spectrum, grid)?;
    let table = pairs(spectrum);
    let samples = exec.map(grid.len(), |i| {
        let t_prev = (i > 0).then(|| grid.time(i - 1));
        sample(&table, t_prev, grid.time(i))
    });
    let mut phase = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    for s in &samples {
        acc += s.dphase;
        phase.push(acc);
    }
    Ok(DecoherenceSeries {
        grid: *grid,
        nu: samples.iter().map(|s| s.nu).collect(),
        echo: samples.iter().map(|s| s.echo).collect(),
        phase,
        dnu: Some(samples.iter().map(|s| s.dnu).collect()),
    })
}

/// Purity of an initially equatorial qubit, `(1 + L)/2`.
pub fn purity(echo: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&echo) {
        return Err(EchoError::Domain(format!(
            "echo value {echo} outside [0, 1]"
        )));
    }
    Ok(0.5 * (1.0 + echo))
}

/// Reduced qubit state: populations kept, `|e><g|` coherence multiplied by `nu`.
pub fn exact_qubit_state(initial: &QubitState, nu: Complex64) -> Result<QubitState> {
    if nu.norm() > 1.0 + 1e-12 {
        return Err(EchoError::Unphysical(format!(
            "|nu| = {} exceeds 1",
            nu.norm()
        )));
    }
    let mut rho = *initial.matrix();
    rho[1][0] *= nu;
    rho[0][1] *= nu.conj();
    Ok(QubitState::from_matrix(rho))
}
