//! Two-level density matrices in the pointer basis `(|g>, |e>)`.
//!
//! Index 0 is `|g>`, index 1 is `|e>`. The Pauli convention is
//! `sigma_z |g> = +|g>`, `sigma_z |e> = -|e>`; with it the master-equation
//! Lamb shift takes the form `Lambda = -phi'/2`.

use num_complex::Complex64;

use crate::error::{EchoError, Result};

pub type Matrix2 = [[Complex64; 2]; 2];

const C0: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Matrix2,
}

impl QubitState {
    /// Pure state `c_g |g> + c_e |e>`; amplitudes are normalized here.
    pub fn pure(c_g: Complex64, c_e: Complex64) -> Result<Self> {
        let norm = (c_g.norm_sqr() + c_e.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(EchoError::Unphysical(
                "zero or non-finite amplitudes".into(),
            ));
        }
        let c = [c_g / norm, c_e / norm];
        let mut rho = [[C0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                rho[a][b] = c[a] * c[b].conj();
            }
        }
        Ok(QubitState { rho })
    }

    pub fn ground() -> Self {
        Self::pure(Complex64::new(1.0, 0.0), C0).unwrap()
    }

    pub fn excited() -> Self {
        Self::pure(C0, Complex64::new(1.0, 0.0)).unwrap()
    }

    /// Equatorial state `(|g> + e^{i phase} |e>)/sqrt(2)`.
    pub fn equatorial(phase: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::pure(Complex64::new(s, 0.0), Complex64::from_polar(s, phase)).unwrap()
    }

    pub fn from_matrix(rho: Matrix2) -> Self {
        QubitState { rho }
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.rho
    }

    pub fn population_g(&self) -> f64 {
        self.rho[0][0].re
    }

    pub fn population_e(&self) -> f64 {
        self.rho[1][1].re
    }

    /// Coefficient of `|e><g|`.
    pub fn coherence(&self) -> Complex64 {
        self.rho[1][0]
    }

    /// Bloch vector `(x, y, z)` with `rho = (I + r.sigma)/2`.
    pub fn bloch(&self) -> [f64; 3] {
        let off = self.rho[0][1];
        [
            2.0 * off.re,
            -2.0 * off.im,
            self.rho[0][0].re - self.rho[1][1].re,
        ]
    }

    pub fn purity(&self) -> f64 {
        let r = self.bloch();
        0.5 * (1.0 + r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
    }

    /// Hermitian, unit trace and Bloch norm at most `1 + tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        let herm = (self.rho[0][1] - self.rho[1][0].conj()).norm() <= tol
            && self.rho[0][0].im.abs() <= tol
            && self.rho[1][1].im.abs() <= tol;
        let trace = (self.rho[0][0].re + self.rho[1][1].re - 1.0).abs() <= tol;
        let r = self.bloch();
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        herm && trace && norm <= 1.0 + tol
    }

    /// Half the Euclidean distance between Bloch vectors, which for qubits is
    /// half the sum of absolute eigenvalues of `rho_1 - rho_2`.
    pub fn trace_distance(&self, other: &QubitState) -> f64 {
        let (a, b) = (self.bloch(), other.bloch());
        let d: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        0.5 * d.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn basis_conventions() {
        assert_eq!(QubitState::ground().bloch(), [0.0, 0.0, 1.0]);
        assert_eq!(QubitState::excited().bloch(), [0.0, 0.0, -1.0]);
        let eq = QubitState::equatorial(0.0);
        let r = eq.bloch();
        assert_abs_diff_eq!(r[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eq.purity(), 1.0, epsilon = 1e-15);
        assert!(eq.is_physical(1e-12));
    }

    #[test]
    fn pure_normalizes() {
        let s = QubitState::pure(Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)).unwrap();
        assert_abs_diff_eq!(s.population_g(), 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(s.population_e(), 0.64, epsilon = 1e-15);
        assert!(QubitState::pure(C0, C0).is_err());
    }

    #[test]
    fn orthogonal_states_are_maximally_distant() {
        let d = QubitState::ground().trace_distance(&QubitState::excited());
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-15);
        let a = QubitState::equatorial(0.3);
        let b = QubitState::equatorial(0.3 + std::f64::consts::PI);
        assert_abs_diff_eq!(a.trace_distance(&b), 1.0, epsilon = 1e-14);
        assert_eq!(a.trace_distance(&a), 0.0);
    }
}
