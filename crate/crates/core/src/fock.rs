// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Truncated two-mode Fock-space storage in the composite basis.

use num_complex::Complex64;

use crate::error::{Error, Mode, Result};
use crate::params::DerivedCoeffs;

/// Inclusive photon-number cutoffs for the α and β modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockGrid {
    pub n_max_alpha: usize,
    pub n_max_beta: usize,
}

impl FockGrid {
    pub fn new(n_max_alpha: usize, n_max_beta: usize) -> Result<Self> {
        if n_max_alpha < 1 || n_max_beta < 1 {
            return Err(Error::InvalidGrid(format!(
                "cutoffs must be at least 1, got ({n_max_alpha}, {n_max_beta})"
            )));
        }
        Ok(FockGrid { n_max_alpha, n_max_beta })
    }

    pub fn len(&self) -> usize {
        (self.n_max_alpha + 1) * (self.n_max_beta + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major flat index, β running fastest.
    #[inline]
    pub fn index(&self, n_alpha: usize, n_beta: usize) -> usize {
        n_alpha * (self.n_max_beta + 1) + n_beta
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / (self.n_max_beta + 1), index % (self.n_max_beta + 1))
    }

    /// Flat index of a signed position, if it lies on the grid.
    #[inline]
    pub fn checked_index(&self, n_alpha: i64, n_beta: i64) -> Option<usize> {
        if n_alpha < 0 || n_beta < 0 || n_alpha > self.n_max_alpha as i64 || n_beta > self.n_max_beta as i64 {
            None
        } else {
            Some(self.index(n_alpha as usize, n_beta as usize))
        }
    }
}

/// Diagonal sector ρ(nα, nβ) of the density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState {
    pub grid: FockGrid,
    pub values: Vec<f64>,
}

impl DiagonalState {
    pub fn new_vacuum(grid: FockGrid) -> Self {
        let mut values = vec![0.0; grid.len()];
        values[0] = 1.0;
        DiagonalState { grid, values }
    }

    pub fn from_values(grid: FockGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} states",
                values.len(),
                grid.len()
            )));
        }
        Ok(DiagonalState { grid, values })
    }

    /// Product state p_α(nα)·p_β(nβ); entries past either distribution's end are zero.
    pub fn product(grid: FockGrid, alpha: &PhotonDistribution, beta: &PhotonDistribution) -> Self {
        let mut values = vec![0.0; grid.len()];
        for (na, pa) in alpha.probs.iter().enumerate().take(grid.n_max_alpha + 1) {
            for (nb, pb) in beta.probs.iter().enumerate().take(grid.n_max_beta + 1) {
                values[grid.index(na, nb)] = pa * pb;
            }
        }
        DiagonalState { grid, values }
    }

    pub fn get(&self, n_alpha: usize, n_beta: usize) -> f64 {
        self.values[self.grid.index(n_alpha, n_beta)]
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn normalize(&mut self) {
        let t = self.trace();
        self.values.iter_mut().for_each(|v| *v /= t);
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Mean photon numbers (n̄α, n̄β) weighted by the raw entries.
    pub fn mean_photons(&self) -> (f64, f64) {
        let (mut sa, mut sb) = (0.0, 0.0);
        for (i, v) in self.values.iter().enumerate() {
            let (na, nb) = self.grid.coords(i);
            sa += na as f64 * v;
            sb += nb as f64 * v;
        }
        (sa, sb)
    }

    /// Mass on the top α row.
    pub fn top_alpha_mass(&self) -> f64 {
        let na = self.grid.n_max_alpha;
        (0..=self.grid.n_max_beta).map(|nb| self.get(na, nb)).sum()
    }

    pub fn marginal(&self, mode: Mode) -> Result<PhotonDistribution> {
        let trace = self.trace();
        if (trace - 1.0).abs() > 1e-6 {
            return Err(Error::TraceMismatch { trace, tol: 1e-6 });
        }
        let len = match mode {
            Mode::Alpha => self.grid.n_max_alpha + 1,
            Mode::Beta => self.grid.n_max_beta + 1,
        };
        let mut p = vec![0.0; len];
        for (i, v) in self.values.iter().enumerate() {
            let (na, nb) = self.grid.coords(i);
            let n = if mode == Mode::Alpha { na } else { nb };
            p[n] += v;
        }
        Ok(PhotonDistribution::from_weights(p))
    }
}

/// Off-diagonal block ρ(nα, nβ; nα+k1, nβ+k2).
///
/// Only offsets with k1 > 0, or k1 = 0 and k2 ≥ 0, are stored; the block at
/// (−k1, −k2) is the elementwise conjugate of the stored one (transposed).
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceBlock {
    pub grid: FockGrid,
    pub k1: i64,
    pub k2: i64,
    pub values: Vec<Complex64>,
}

impl CoherenceBlock {
    pub fn zeros(grid: FockGrid, k1: i64, k2: i64) -> Result<Self> {
        check_offsets(&grid, k1, k2)?;
        Ok(CoherenceBlock { grid, k1, k2, values: vec![Complex64::new(0.0, 0.0); grid.len()] })
    }

    /// Whether row position (nα, nβ) has its partner (nα+k1, nβ+k2) on the grid.
    pub fn in_block(&self, n_alpha: usize, n_beta: usize) -> bool {
        self.grid.checked_index(n_alpha as i64 + self.k1, n_beta as i64 + self.k2).is_some()
    }

    pub fn get(&self, n_alpha: usize, n_beta: usize) -> Complex64 {
        self.values[self.grid.index(n_alpha, n_beta)]
    }

    pub fn set(&mut self, n_alpha: usize, n_beta: usize, v: Complex64) {
        debug_assert!(self.in_block(n_alpha, n_beta) || v == Complex64::new(0.0, 0.0));
        let i = self.grid.index(n_alpha, n_beta);
        self.values[i] = v;
    }

    /// Σ of all entries, S = Σ ρ(nα, nβ; nα+k1, nβ+k2).
    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// Zeroes entries whose partner index lies off the grid.
    pub fn enforce_support(&mut self) {
        for i in 0..self.values.len() {
            let (na, nb) = self.grid.coords(i);
            if !self.in_block(na, nb) {
                self.values[i] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Rejects offsets outside the storage convention or larger than the grid.
pub fn check_offsets(grid: &FockGrid, k1: i64, k2: i64) -> Result<()> {
    let canonical = k1 > 0 || (k1 == 0 && k2 >= 0);
    let fits = k1.unsigned_abs() as usize <= grid.n_max_alpha && k2.unsigned_abs() as usize <= grid.n_max_beta;
    if canonical && fits {
        Ok(())
    } else {
        Err(Error::InvalidOffset { k1, k2 })
    }
}

/// Dense density matrix over the full grid from the diagonal sector and stored blocks.
///
/// Returns a row-major `grid.len() × grid.len()` matrix. Offsets not supplied are zero.
pub fn reconstruct_dense(diag: &DiagonalState, blocks: &[CoherenceBlock]) -> Vec<Complex64> {
    let grid = diag.grid;
    let n = grid.len();
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, v) in diag.values.iter().enumerate() {
        m[i * n + i] = Complex64::new(*v, 0.0);
    }
    for blk in blocks {
        if blk.k1 == 0 && blk.k2 == 0 {
            continue;
        }
        for i in 0..n {
            let (na, nb) = grid.coords(i);
            if let Some(j) = grid.checked_index(na as i64 + blk.k1, nb as i64 + blk.k2) {
                let v = blk.values[i];
                m[i * n + j] = v;
                m[j * n + i] = v.conj();
            }
        }
    }
    m
}

/// Normalized photon-number distribution of a single mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    pub probs: Vec<f64>,
}

impl PhotonDistribution {
    /// Normalizes non-negative weights; round-off negatives are clamped to 0.
    pub fn from_weights(mut weights: Vec<f64>) -> Self {
        weights.iter_mut().for_each(|w| *w = w.max(0.0));
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        PhotonDistribution { probs: weights }
    }

    /// Normalizes log-weights after shifting by their maximum.
    pub fn from_log_weights(log_weights: &[f64]) -> Self {
        let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::from_weights(log_weights.iter().map(|l| (l - top).exp()).collect())
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut probs = vec![0.0; n_max + 1];
        probs[0] = 1.0;
        PhotonDistribution { probs }
    }

    /// Bose–Einstein law with the given mean, truncated at `n_max` and renormalized.
    pub fn thermal(nbar: f64, n_max: usize) -> Self {
        let x = nbar / (1.0 + nbar);
        Self::from_log_weights(&(0..=n_max).map(|n| n as f64 * x.ln()).collect::<Vec<_>>())
    }

    /// Poisson law with the given mean, truncated at `n_max` and renormalized.
    pub fn poisson(nbar: f64, n_max: usize) -> Self {
        let mut lw = Vec::with_capacity(n_max + 1);
        let mut acc = 0.0;
        for n in 0..=n_max {
            if n > 0 {
                acc += nbar.ln() - (n as f64).ln();
            }
            lw.push(acc);
        }
        Self::from_log_weights(&lw)
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum()
    }

    /// (mean, second moment).
    pub fn moments(&self) -> (f64, f64) {
        (self.mean(), self.second_moment())
    }

    pub fn tail_mass(&self) -> f64 {
        *self.probs.last().unwrap()
    }

    /// Total-variation distance, padding the shorter support with zeros.
    pub fn total_variation(&self, other: &PhotonDistribution) -> f64 {
        let n = self.probs.len().max(other.probs.len());
        let at = |d: &PhotonDistribution, i: usize| d.probs.get(i).copied().unwrap_or(0.0);
        0.5 * (0..n).map(|i| (at(self, i) - at(other, i)).abs()).sum::<f64>()
    }
}

/// Grid sized from the analytic mean: n̄ + 10√(n̄+1) + 20 in α, 15 in β.
pub fn suggest_grid(coeffs: &DerivedCoeffs) -> FockGrid {
    let nbar = if coeffs.b > 0.0 && coeffs.a > coeffs.c1_tilde() {
        coeffs.a_tilde() / coeffs.b * (coeffs.pump_ratio() - 1.0)
    } else {
        0.0
    };
    let n_max_alpha = (nbar + 10.0 * (nbar + 1.0).sqrt() + 20.0).ceil() as usize;
    FockGrid { n_max_alpha, n_max_beta: 15 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_coeffs, LaserParams};
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_state() {
        let s = DiagonalState::new_vacuum(FockGrid::new(5, 5).unwrap());
        assert_eq!(s.trace(), 1.0);
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.mean_photons(), (0.0, 0.0));
        let s = DiagonalState::new_vacuum(FockGrid::new(1, 1).unwrap());
        assert_eq!(s.values.len(), 4);
        assert_eq!(s.values.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn grid_rejects_zero_cutoff() {
        assert!(FockGrid::new(0, 3).is_err());
        assert!(FockGrid::new(3, 0).is_err());
    }

    #[test]
    fn uniform_marginals() {
        let g = FockGrid::new(1, 1).unwrap();
        let s = DiagonalState::from_values(g, vec![0.25; 4]).unwrap();
        assert_eq!(s.marginal(Mode::Alpha).unwrap().probs, vec![0.5, 0.5]);
        assert_eq!(s.marginal(Mode::Beta).unwrap().probs, vec![0.5, 0.5]);
    }

    #[test]
    fn marginal_rejects_bad_trace() {
        let g = FockGrid::new(1, 1).unwrap();
        let s = DiagonalState::from_values(g, vec![0.3; 4]).unwrap();
        assert!(matches!(s.marginal(Mode::Alpha), Err(Error::TraceMismatch { .. })));
    }

    #[test]
    fn product_with_vacuum_beta_has_geometric_alpha() {
        let g = FockGrid::new(40, 3).unwrap();
        let geo: Vec<f64> = (0..=40).map(|n| 0.5f64.powi(n + 1)).collect();
        let norm: f64 = geo.iter().sum();
        let alpha = PhotonDistribution { probs: geo.iter().map(|p| p / norm).collect() };
        let s = DiagonalState::product(g, &alpha, &PhotonDistribution::vacuum(3));
        let m = s.marginal(Mode::Alpha).unwrap();
        for (n, p) in m.probs.iter().enumerate() {
            assert_abs_diff_eq!(*p, 0.5f64.powi(n as i32 + 1) / norm, epsilon = 1e-15);
        }
    }

    #[test]
    fn geometric_mean() {
        let d = PhotonDistribution { probs: (0..=60).map(|n| 0.5f64.powi(n + 1)).collect() };
        assert_abs_diff_eq!(d.mean(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn poisson_moments() {
        let d = PhotonDistribution::poisson(4.0, 60);
        assert_abs_diff_eq!(d.mean(), 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(d.second_moment(), 20.0, epsilon = 1e-9);
        assert_eq!(PhotonDistribution::vacuum(4).moments(), (0.0, 0.0));
    }

    #[test]
    fn suggested_grids() {
        let base = LaserParams::reference();
        let below = derive_coeffs(&base.with_pump_ratio(0.5));
        assert_eq!(suggest_grid(&below), FockGrid { n_max_alpha: 30, n_max_beta: 15 });
        let above = derive_coeffs(&base.with_pump_ratio(2.0));
        let g = suggest_grid(&above);
        // n̄ = 10 / 0.0296 = 337.84 → 337.84 + 10·√338.84 + 20 = 541.9
        assert_eq!(g.n_max_alpha, 542);
        assert_eq!(g.n_max_beta, 15);
    }

    #[test]
    fn offsets_follow_storage_rule() {
        let g = FockGrid::new(4, 4).unwrap();
        assert!(CoherenceBlock::zeros(g, 1, -2).is_ok());
        assert!(CoherenceBlock::zeros(g, 0, 2).is_ok());
        assert!(CoherenceBlock::zeros(g, 0, -1).is_err());
        assert!(CoherenceBlock::zeros(g, -1, 0).is_err());
        assert!(CoherenceBlock::zeros(g, 5, 0).is_err());
    }
}
