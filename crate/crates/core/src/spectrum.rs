//! Free-fermion description of the transverse-field Ising ring.
//!
//! After the Jordan-Wigner mapping each pair of momenta `(k, -k)` decouples,
//! and the ring ground state lives in the even fermion-parity sector whose
//! momenta are `k_j = (2j - 1) pi / N` (antiperiodic fermion boundary). Both
//! qubit branches share this grid: the ground branch sees the field `lambda`,
//! the excited branch sees `lambda* = lambda + delta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{EchoError, Result};

/// Physical parameters of one environment instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    coupling: f64,
    lambda: f64,
    delta: f64,
    lambda_star: f64,
    n_spins: usize,
}

impl ChainConfig {
    /// Builds a configuration from the bare field `lambda`; `lambda* = lambda + delta`.
    pub fn new(coupling: f64, lambda: f64, delta: f64, n_spins: usize) -> Result<Self> {
        Self::validated(coupling, lambda, delta, lambda + delta, n_spins)
    }

    /// Builds a configuration from the renormalized field `lambda*`, which is
    /// stored exactly as given so that scan values such as `1.0` stay exact.
    pub fn with_lambda_star(
        coupling: f64,
        lambda_star: f64,
        delta: f64,
        n_spins: usize,
    ) -> Result<Self> {
        Self::validated(coupling, lambda_star - delta, delta, lambda_star, n_spins)
    }

    fn validated(
        coupling: f64,
        lambda: f64,
        delta: f64,
        lambda_star: f64,
        n_spins: usize,
    ) -> Result<Self> {
        check_n_spins(n_spins)?;
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(EchoError::InvalidConfig(format!(
                "coupling J must be positive and finite, got {coupling}"
            )));
        }
        if !(lambda.is_finite() && delta.is_finite() && lambda_star.is_finite()) {
            return Err(EchoError::InvalidConfig(format!(
                "fields must be finite (lambda = {lambda}, delta = {delta})"
            )));
        }
        Ok(ChainConfig {
            coupling,
            lambda,
            delta,
            lambda_star,
            n_spins,
        })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }
}

fn check_n_spins(n_spins: usize) -> Result<()> {
    if n_spins < 4 || !n_spins.is_multiple_of(2) {
        return Err(EchoError::InvalidConfig(format!(
            "n_spins must be even and at least 4, got {n_spins}"
        )));
    }
    Ok(())
}

/// Positive momenta of the even-parity sector, `(2j - 1) pi / N` for `j = 1..=N/2`.
pub fn momentum_grid(n_spins: usize) -> Result<Vec<f64>> {
    check_n_spins(n_spins)?;
    let n = n_spins as f64;
    Ok((1..=n_spins / 2)
        .map(|j| (2 * j - 1) as f64 * PI / n)
        .collect())
}

/// Quasiparticle energy `2 J sqrt((h/J - cos k)^2 + sin^2 k)`.
pub fn dispersion(k: f64, field: f64, coupling: f64) -> f64 {
    debug_assert!(k > 0.0 && k < PI, "momentum {k} outside (0, pi)");
    2.0 * coupling * (field / coupling - k.cos()).hypot(k.sin())
}

/// Bogoliubov angle `theta` with `tan(2 theta) = sin k / (h/J - cos k)` and
/// `2 theta` taken in `(0, pi)`, so `theta` is continuous in the field.
pub fn bogoliubov_angle(k: f64, field: f64, coupling: f64) -> f64 {
    debug_assert!(k > 0.0 && k < PI, "momentum {k} outside (0, pi)");
    0.5 * k.sin().atan2(field / coupling - k.cos())
}

/// One `(k, -k)` pair seen by both qubit branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub k: f64,
    pub theta_g: f64,
    pub theta_e: f64,
    /// Relative branch angle `theta_e - theta_g`.
    pub alpha: f64,
    pub eps_g: f64,
    pub eps_e: f64,
}

impl Mode {
    /// Oscillation weight `sin^2(2 alpha)` of this mode's echo factor.
    pub fn weight(&self) -> f64 {
        let s = (2.0 * self.alpha).sin();
        s * s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    config: ChainConfig,
    modes: Vec<Mode>,
}

impl ModeSpectrum {
    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Largest excited-branch quasiparticle energy.
    pub fn max_eps_e(&self) -> f64 {
        self.modes.iter().map(|m| m.eps_e).fold(0.0, f64::max)
    }

    /// Ground energy of one branch, `-sum_{k>0} eps_k`.
    pub fn ground_energy_g(&self) -> f64 {
        -self.modes.iter().map(|m| m.eps_g).sum::<f64>()
    }

    pub fn ground_energy_e(&self) -> f64 {
        -self.modes.iter().map(|m| m.eps_e).sum::<f64>()
    }
}

pub fn mode_spectrum(config: &ChainConfig) -> Result<ModeSpectrum> {
    let j = config.coupling();
    let (h_g, h_e) = (config.lambda(), config.lambda_star());
    let modes = momentum_grid(config.n_spins())?
        .into_iter()
        .map(|k| {
            let theta_g = bogoliubov_angle(k, h_g, j);
            let theta_e = bogoliubov_angle(k, h_e, j);
            Mode {
                k,
                theta_g,
                theta_e,
                alpha: theta_e - theta_g,
                eps_g: dispersion(k, h_g, j),
                eps_e: dispersion(k, h_e, j),
            }
        })
        .collect();
    Ok(ModeSpectrum {
        config: *config,
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn grid_small_rings() {
        let g4 = momentum_grid(4).unwrap();
        assert_abs_diff_eq!(g4[0], PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g4[1], 3.0 * PI / 4.0, epsilon = 1e-15);
        let g8 = momentum_grid(8).unwrap();
        for (j, k) in g8.iter().enumerate() {
            assert_abs_diff_eq!(*k, (2 * j + 1) as f64 * PI / 8.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        for n in [0, 1, 2, 3, 5, 7, 101] {
            assert!(matches!(momentum_grid(n), Err(EchoError::InvalidConfig(_))));
        }
    }

    #[test]
    fn grid_is_reflection_symmetric() {
        for n in [4, 6, 10, 400] {
            let g = momentum_grid(n).unwrap();
            let m = g.len();
            assert_eq!(m, n / 2);
            for j in 0..m {
                assert_abs_diff_eq!(g[j] + g[m - 1 - j], PI, epsilon = 1e-12);
                assert!(g[j] > 0.0 && g[j] < PI);
            }
            assert!(g.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn dispersion_reference_points() {
        assert_abs_diff_eq!(dispersion(PI / 2.0, 0.0, 1.0), 2.0, epsilon = 1e-15);
        assert!(dispersion(1e-6, 1.0, 1.0) < 1e-5);
        // k = pi/8, h = 0.5: 2 sqrt((0.5 - cos k)^2 + sin^2 k) = 2 sqrt(1.25 - cos k)
        let expected = 2.0 * (1.25 - (PI / 8.0).cos()).sqrt();
        assert_abs_diff_eq!(dispersion(PI / 8.0, 0.5, 1.0), expected, epsilon = 1e-15);
    }

    #[test]
    fn angle_reference_points() {
        assert_abs_diff_eq!(
            bogoliubov_angle(PI / 2.0, 0.0, 1.0),
            PI / 4.0,
            epsilon = 1e-15
        );
        for k in momentum_grid(16).unwrap() {
            assert!(bogoliubov_angle(k, 1e9, 1.0) < 1e-8);
        }
    }

    #[test]
    fn angle_continuous_across_cos_k() {
        let k = PI / 8.0;
        let h0 = k.cos();
        let below = bogoliubov_angle(k, h0 - 1e-9, 1.0);
        let above = bogoliubov_angle(k, h0 + 1e-9, 1.0);
        assert!((below - above).abs() < 1e-8);
        assert_abs_diff_eq!(bogoliubov_angle(k, h0, 1.0), PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_coupling_gives_identical_branches() {
        let cfg = ChainConfig::new(1.0, 0.7, 0.0, 20).unwrap();
        let s = mode_spectrum(&cfg).unwrap();
        assert_eq!(s.modes().len(), 10);
        for m in s.modes() {
            assert_eq!(m.alpha, 0.0);
            assert_eq!(m.eps_g, m.eps_e);
        }
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::new(0.0, 0.5, 0.1, 8).is_err());
        assert!(ChainConfig::new(-1.0, 0.5, 0.1, 8).is_err());
        assert!(ChainConfig::new(1.0, f64::NAN, 0.1, 8).is_err());
        assert!(ChainConfig::new(1.0, 0.5, 0.1, 7).is_err());
        let c = ChainConfig::with_lambda_star(1.0, 1.0, 0.01, 100).unwrap();
        assert_eq!(c.lambda_star(), 1.0);
        assert_abs_diff_eq!(c.lambda() + c.delta(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn alpha_is_linear_in_delta() {
        // Finite differences in delta: alpha(2d) ~ 2 alpha(d) for small d.
        let k = 0.9;
        let alpha = |d: f64| bogoliubov_angle(k, 0.6 + d, 1.0) - bogoliubov_angle(k, 0.6, 1.0);
        let slope = (alpha(1e-6) - alpha(-1e-6)) / 2e-6;
        assert!((alpha(1e-4) / 1e-4 - slope).abs() < 1e-3 * slope.abs());
        assert!((alpha(2e-6) - 2.0 * alpha(1e-6)).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn spectrum_bounds(lambda in -3.0f64..3.0, delta in -0.5f64..0.5, half in 2usize..200) {
            let cfg = ChainConfig::new(1.0, lambda, delta, 2 * half).unwrap();
            let s = mode_spectrum(&cfg).unwrap();
            for m in s.modes() {
                prop_assert!(m.eps_g >= 0.0 && m.eps_e >= 0.0);
                prop_assert!(m.theta_g > 0.0 && m.theta_g < PI / 2.0);
                prop_assert!(m.theta_e > 0.0 && m.theta_e < PI / 2.0);
            }
        }
    }
}
