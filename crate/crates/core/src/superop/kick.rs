// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{CoherenceBlock, DiagonalState};
use crate::params::DerivedCoeffs;

const OVERFLOW_TOL: f64 = 1e-10;

/// sin(x)/x·τ evaluated as sin(φτ)/φ, with a series near φτ = 0.
#[inline]
pub(crate) fn sin_over(phi: f64, tau: f64) -> f64 {
    let x = phi * tau;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        tau * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        (x).sin() / phi
    }
}

/// Eigenvalue tables of the Rabi frequencies at a fixed interaction time.
///
/// `phi[n]` belongs to |n⟩ with the atom excited, `phi_lower[n]` to |n⟩
/// with the atom in its ground state after emitting into |n−1⟩.
#[derive(Debug, Clone)]
pub struct KickOperators {
    pub tau: f64,
    pub half_delta: f64,
    pub g: f64,
    pub phi: Vec<f64>,
    pub phi_lower: Vec<f64>,
    pub cos: Vec<f64>,
    pub sinc: Vec<f64>,
    pub sinc_lower: Vec<f64>,
}

impl KickOperators {
    pub fn new(coeffs: &DerivedCoeffs, n_max: usize, tau: f64) -> Self {
        let g_sq = coeffs.g * coeffs.g;
        let half_delta = 0.5 * coeffs.delta_bar;
        let hd_sq = half_delta * half_delta;
        let phi: Vec<f64> = (0..=n_max).map(|n| (g_sq * (n + 1) as f64 + hd_sq).sqrt()).collect();
        let phi_lower: Vec<f64> = (0..=n_max).map(|n| (g_sq * n as f64 + hd_sq).sqrt()).collect();
        let cos = phi.iter().map(|p| (p * tau).cos()).collect();
        let sinc = phi.iter().map(|p| sin_over(*p, tau)).collect();
        let sinc_lower = phi_lower.iter().map(|p| sin_over(*p, tau)).collect();
        KickOperators { tau, half_delta, g: coeffs.g, phi, phi_lower, cos, sinc, sinc_lower }
    }

    /// Amplitude left on |n⟩ when the atom stays excited.
    #[inline]
    pub fn stay(&self, n: usize) -> Complex64 {
        Complex64::new(self.cos[n], -self.half_delta * self.sinc[n])
    }

    /// Amplitude for |n−1⟩ → |n⟩ by emission, g√n sin(φ′τ)/φ′ (zero for n = 0).
    #[inline]
    pub fn emit(&self, n: usize) -> f64 {
        self.g * (n as f64).sqrt() * self.sinc_lower[n]
    }
}

/// Applies Λ(τ) to the diagonal sector.
pub fn lambda_kick(state: &DiagonalState, tau: f64, coeffs: &DerivedCoeffs) -> Result<DiagonalState> {
    let grid = state.grid;
    let mass = state.top_alpha_mass().abs();
    if mass > OVERFLOW_TOL {
        return Err(Error::GridOverflow { mass });
    }
    let ops = KickOperators::new(coeffs, grid.n_max_alpha, tau);
    let mut out = vec![0.0; grid.len()];
    for na in 0..=grid.n_max_alpha {
        let keep = ops.stay(na).norm_sqr();
        let gain = ops.emit(na).powi(2);
        for nb in 0..=grid.n_max_beta {
            let mut v = keep * state.get(na, nb);
            if na > 0 {
                v += gain * state.get(na - 1, nb);
            }
            out[grid.index(na, nb)] = v;
        }
    }
    DiagonalState::from_values(grid, out)
}

/// Applies Λ(τ) to a stored coherence block.
pub fn lambda_kick_block(block: &CoherenceBlock, tau: f64, coeffs: &DerivedCoeffs) -> Result<CoherenceBlock> {
    let grid = block.grid;
    let k1 = block.k1;
    let top_row = grid.n_max_alpha as i64 - k1.max(0);
    let mass = (0..=grid.n_max_beta)
        .filter(|&nb| top_row >= 0 && block.in_block(top_row as usize, nb))
        .map(|nb| block.get(top_row as usize, nb).norm())
        .fold(0.0, f64::max);
    if mass > OVERFLOW_TOL {
        return Err(Error::GridOverflow { mass });
    }
    let ops = KickOperators::new(coeffs, grid.n_max_alpha, tau);
    let mut out = CoherenceBlock::zeros(grid, block.k1, block.k2)?;
    for na in 0..=grid.n_max_alpha {
        let ma = na as i64 + k1;
        if ma < 0 || ma > grid.n_max_alpha as i64 {
            continue;
        }
        let ma = ma as usize;
        let keep = ops.stay(na) * ops.stay(ma).conj();
        let feed = if na > 0 && ma > 0 { ops.emit(na) * ops.emit(ma) } else { 0.0 };
        for nb in 0..=grid.n_max_beta {
            if !block.in_block(na, nb) {
                continue;
            }
            let mut v = keep * block.get(na, nb);
            if feed != 0.0 {
                v += feed * block.get(na - 1, nb);
            }
            out.set(na, nb, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockGrid;
    use crate::params::{derive_coeffs, LaserParams};
    use approx::assert_abs_diff_eq;

    fn resonant() -> DerivedCoeffs {
        derive_coeffs(&LaserParams::reference().with_delta(0.0).with_pump_rate(10.0))
    }

    #[test]
    fn full_rabi_transfer() {
        let c = resonant();
        let grid = FockGrid::new(6, 2).unwrap();
        let tau = std::f64::consts::PI / (2.0 * c.g);
        let s = lambda_kick(&DiagonalState::new_vacuum(grid), tau, &c).unwrap();
        assert_abs_diff_eq!(s.get(1, 0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.get(0, 0), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn vacuum_rabi_oscillation() {
        let c = resonant();
        let grid = FockGrid::new(6, 2).unwrap();
        for tau in [0.0, 1e-7, 0.3, 4.0, 17.0] {
            let s = lambda_kick(&DiagonalState::new_vacuum(grid), tau, &c).unwrap();
            let x = c.g * tau;
            assert_abs_diff_eq!(s.get(1, 0), x.sin().powi(2), epsilon = 1e-14);
            assert_abs_diff_eq!(s.get(0, 0), x.cos().powi(2), epsilon = 1e-14);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let c = resonant();
        let grid = FockGrid::new(2, 1).unwrap();
        let mut v = vec![0.0; grid.len()];
        v[grid.index(2, 0)] = 1.0;
        let s = DiagonalState::from_values(grid, v).unwrap();
        assert!(matches!(lambda_kick(&s, 1.0, &c), Err(Error::GridOverflow { .. })));
    }

    #[test]
    fn small_argument_series() {
        let exact = |phi: f64, tau: f64| (phi * tau).sin() / phi;
        assert_abs_diff_eq!(sin_over(1e-3, 0.05), exact(1e-3, 0.05), epsilon = 1e-18);
        assert_eq!(sin_over(0.0, 2.5), 2.5);
    }
}
