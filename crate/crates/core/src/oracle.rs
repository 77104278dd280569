//! Brute-force exact diagonalization of small Ising rings.
//!
//! Ground truth for the quasiparticle construction: dense spin Hamiltonians
//! `H = -J sum_j sz_j sz_{j+1} + h sum_j sx_j` on a periodic ring, the
//! environment ground state, and the literal overlap
//! `nu(t) = <Phi| e^{i H_g t} e^{-i H_e t} |Phi>`.
//!
//! Basis states are bit strings; bit `j` set means spin `j` points down in
//! `sz`. The parity `P = prod_j sx_j` flips every bit and commutes with `H`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::echo::{DecoherenceSeries, TimeGrid};
use crate::error::{EchoError, Result};

pub const MAX_SPINS: usize = 14;
/// Runtime guard for full overlap series.
pub const MAX_ECHO_SPINS: usize = 12;
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    pub n_spins: usize,
    pub matrix: DMatrix<f64>,
}

impl DenseHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.matrix;
        (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Ising bond energy of a basis state; the literal periodic sum, so a
/// 2-ring counts its single bond twice.
fn bond_energy(state: usize, n_spins: usize, coupling: f64) -> f64 {
    let spin = |j: usize| {
        if state >> (j % n_spins) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    -coupling * (0..n_spins).map(|j| spin(j) * spin(j + 1)).sum::<f64>()
}

fn check_size(n_spins: usize, cap: usize) -> Result<()> {
    if n_spins < 2 {
        return Err(EchoError::InvalidConfig(format!(
            "need at least 2 spins, got {n_spins}"
        )));
    }
    if n_spins > cap {
        return Err(EchoError::Resource(format!(
            "{n_spins} spins exceeds the dense limit of {cap}"
        )));
    }
    Ok(())
}

pub fn build_hamiltonian(n_spins: usize, field: f64, coupling: f64) -> Result<DenseHamiltonian> {
    check_size(n_spins, MAX_SPINS)?;
    let dim = 1usize << n_spins;
    let mut m = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        m[(s, s)] = bond_energy(s, n_spins, coupling);
        for j in 0..n_spins {
            m[(s ^ (1 << j), s)] += field;
        }
    }
    Ok(DenseHamiltonian { n_spins, matrix: m })
}

/// Hamiltonian restricted to the `P = +1` sector, in the basis
/// `(|s> + |P s>)/sqrt(2)` with representatives `s` whose top bit is clear.
pub fn build_even_sector(n_spins: usize, field: f64, coupling: f64) -> Result<DenseHamiltonian> {
    check_size(n_spins, MAX_SPINS)?;
    let dim = 1usize << (n_spins - 1);
    let mask = (1usize << n_spins) - 1;
    let top = 1usize << (n_spins - 1);
    let rep = |s: usize| if s & top == 0 { s } else { s ^ mask };
    let mut m = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        m[(s, s)] = bond_energy(s, n_spins, coupling);
        for j in 0..n_spins {
            m[(rep(s ^ (1 << j)), s)] += field;
        }
    }
    Ok(DenseHamiltonian { n_spins, matrix: m })
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: DVector<f64>,
    /// Gap to the next eigenvalue.
    pub gap: f64,
    pub degenerate: bool,
}

fn lowest(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> (usize, f64) {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let gap = if order.len() > 1 {
        eig.eigenvalues[order[1]] - eig.eigenvalues[order[0]]
    } else {
        f64::INFINITY
    };
    (order[0], gap)
}

/// Normalized lowest eigenvector, first non-negligible amplitude positive.
pub fn ground_state(h: &DenseHamiltonian) -> GroundState {
    let eig = SymmetricEigen::new(h.matrix.clone());
    let (idx, gap) = lowest(&eig);
    let mut v = eig.eigenvectors.column(idx).into_owned();
    v /= v.norm();
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v = -v;
        }
    }
    GroundState {
        energy: eig.eigenvalues[idx],
        vector: v,
        gap,
        degenerate: gap < DEGENERACY_GAP,
    }
}

/// Expands an even-sector vector back onto the full `2^N` basis.
pub fn embed_even(n_spins: usize, v: &DVector<f64>) -> DVector<f64> {
    let mask = (1usize << n_spins) - 1;
    let mut out = DVector::zeros(1 << n_spins);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (r, x) in v.iter().enumerate() {
        out[r] += s * x;
        out[r ^ mask] += s * x;
    }
    out
}

/// Decoherence series of an `n_spins` ring by exact diagonalization.
///
/// `|Phi>` is the ground state of `H_g` (field `lambda`); it lies in the even
/// parity sector, so both branches are diagonalized there. Then
/// `nu(t) = e^{i E_0 t} sum_n |<n_e|Phi>|^2 e^{-i E_n^e t}`.
pub fn oracle_echo(
    n_spins: usize,
    lambda: f64,
    delta: f64,
    coupling: f64,
    grid: &TimeGrid,
) -> Result<DecoherenceSeries> {
    check_size(n_spins, MAX_ECHO_SPINS)?;
    let h_g = build_even_sector(n_spins, lambda, coupling)?;
    let h_e = build_even_sector(n_spins, lambda + delta, coupling)?;
    let phi = ground_state(&h_g);
    let eig_e = SymmetricEigen::new(h_e.matrix);
    let weights: Vec<(f64, f64)> = eig_e
        .eigenvectors
        .column_iter()
        .zip(eig_e.eigenvalues.iter())
        .map(|(col, &e)| (e, col.dot(&phi.vector).powi(2)))
        .collect();
    let nu = grid
        .times()
        .map(|t| {
            let sum: Complex64 = weights
                .iter()
                .map(|&(e, w)| Complex64::from_polar(w, -e * t))
                .sum();
            sum * Complex64::from_polar(1.0, phi.energy * t)
        })
        .collect();
    DecoherenceSeries::from_factors(*grid, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_ring_double_counts_its_bond() {
        let h = build_hamiltonian(2, 0.0, 1.0).unwrap();
        let ev = h.eigenvalues();
        for (a, b) in ev.iter().zip([-2.0, -2.0, 2.0, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            build_hamiltonian(15, 0.5, 1.0),
            Err(EchoError::Resource(_))
        ));
        assert!(matches!(
            build_hamiltonian(1, 0.5, 1.0),
            Err(EchoError::InvalidConfig(_))
        ));
        let grid = TimeGrid::new(0.0, 0.1, 3).unwrap();
        assert!(matches!(
            oracle_echo(13, 0.5, 0.1, 1.0, &grid),
            Err(EchoError::Resource(_))
        ));
    }

    #[test]
    fn hermitian_and_variational() {
        let h = build_hamiltonian(6, 0.7, 1.0).unwrap();
        assert!(h.is_hermitian(1e-12));
        let gs = ground_state(&h);
        let hv = &h.matrix * &gs.vector;
        assert_abs_diff_eq!(gs.vector.dot(&hv), gs.energy, epsilon = 1e-10);
        assert_abs_diff_eq!(gs.energy, h.eigenvalues()[0], epsilon = 1e-10);
    }

    #[test]
    fn strong_field_ground_state_is_polarized() {
        // With +h sum sx the ground state aligns along -x: amplitudes (-1)^popcount / 2^(N/2).
        let n = 6;
        let h = build_hamiltonian(n, 1e4, 1.0).unwrap();
        let gs = ground_state(&h);
        let dim = 1usize << n;
        let amp = (dim as f64).sqrt().recip();
        let overlap: f64 = (0..dim)
            .map(|s| {
                let sign = if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sign * amp * gs.vector[s]
            })
            .sum();
        assert!(overlap.abs() > 1.0 - 1e-6);
        assert!((gs.energy + n as f64 * 1e4).abs() / 1e4 < 1e-3);
    }

    #[test]
    fn classical_limit_is_degenerate() {
        let gs = ground_state(&build_hamiltonian(6, 0.0, 1.0).unwrap());
        assert!(gs.degenerate);
        assert_abs_diff_eq!(gs.energy, -6.0, epsilon = 1e-12);
    }

    #[test]
    fn even_sector_holds_the_ground_state() {
        let n = 8;
        let full = ground_state(&build_hamiltonian(n, 0.5, 1.0).unwrap());
        let even = ground_state(&build_even_sector(n, 0.5, 1.0).unwrap());
        assert_abs_diff_eq!(full.energy, even.energy, epsilon = 1e-10);
        let embedded = embed_even(n, &even.vector);
        assert_abs_diff_eq!(embedded.dot(&full.vector).abs(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn trivial_overlaps() {
        let grid = TimeGrid::new(0.0, 0.05, 100).unwrap();
        let s = oracle_echo(6, 0.6, 0.0, 1.0, &grid).unwrap();
        for nu in &s.nu {
            assert_abs_diff_eq!(nu.re, 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(nu.im, 0.0, epsilon = 1e-10);
        }
        let s = oracle_echo(6, 0.6, 0.2, 1.0, &grid).unwrap();
        assert_abs_diff_eq!(s.nu[0].re, 1.0, epsilon = 1e-12);
        assert!(s.nu.iter().all(|z| z.norm() <= 1.0 + 1e-12));
    }
}
