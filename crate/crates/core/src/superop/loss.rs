// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use crate::fock::FockGrid;
use crate::params::{composite_transform, LaserParams};

/// Dense density matrix in the bare (a1, a2) number basis.
///
/// `rho` is row-major with side `grid.len()`; the grid's α/β cutoffs are read
/// as the cutoffs of modes 1 and 2.
#[derive(Debug, Clone, PartialEq)]
pub struct BareState {
    pub grid: FockGrid,
    pub rho: Vec<Complex64>,
}

impl BareState {
    pub fn zeros(grid: FockGrid) -> Self {
        let n = grid.len();
        BareState { grid, rho: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.rho[i * self.dim() + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.at(i, i)).sum()
    }
}

fn occupation(grid: &FockGrid, i: usize, mode: usize) -> usize {
    let (n1, n2) = grid.coords(i);
    if mode == 0 {
        n1
    } else {
        n2
    }
}

fn shifted(grid: &FockGrid, i: usize, mode: usize, step: i64) -> Option<usize> {
    let (n1, n2) = grid.coords(i);
    let (d1, d2) = if mode == 0 { (step, 0) } else { (0, step) };
    grid.checked_index(n1 as i64 + d1, n2 as i64 + d2)
}

/// a_k X
fn left_lower(grid: &FockGrid, k: usize, x: &[Complex64]) -> Vec<Complex64> {
    let d = grid.len();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        if let Some(l) = shifted(grid, i, k, 1) {
            let amp = ((occupation(grid, i, k) + 1) as f64).sqrt();
            for j in 0..d {
                out[i * d + j] = amp * x[l * d + j];
            }
        }
    }
    out
}

/// a_k† X
fn left_raise(grid: &FockGrid, k: usize, x: &[Complex64]) -> Vec<Complex64> {
    let d = grid.len();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        if let Some(l) = shifted(grid, i, k, -1) {
            let amp = (occupation(grid, i, k) as f64).sqrt();
            for j in 0..d {
                out[i * d + j] = amp * x[l * d + j];
            }
        }
    }
    out
}

/// X a_k†
fn right_raise(grid: &FockGrid, k: usize, x: &[Complex64]) -> Vec<Complex64> {
    let d = grid.len();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        if let Some(l) = shifted(grid, j, k, 1) {
            let amp = ((occupation(grid, j, k) + 1) as f64).sqrt();
            for i in 0..d {
                out[i * d + j] = amp * x[i * d + l];
            }
        }
    }
    out
}

/// X a_k
fn right_lower(grid: &FockGrid, k: usize, x: &[Complex64]) -> Vec<Complex64> {
    let d = grid.len();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        if let Some(l) = shifted(grid, j, k, -1) {
            let amp = (occupation(grid, j, k) as f64).sqrt();
            for i in 0..d {
                out[i * d + j] = amp * x[i * d + l];
            }
        }
    }
    out
}

/// Σ γ_{λλ'} (2 a_λ' ρ a_λ† − ρ a_λ† a_λ' − a_λ† a_λ' ρ) with γ21 = γ12.
pub fn loss_apply_bare(state: &BareState, params: &LaserParams) -> BareState {
    let grid = state.grid;
    let gamma = [[params.gamma11, params.gamma12], [params.gamma12, params.gamma22]];
    let mut out = BareState::zeros(grid);
    for (l, row) in gamma.iter().enumerate() {
        for (lp, &g) in row.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let jump = right_raise(&grid, l, &left_lower(&grid, lp, &state.rho));
            let right = right_lower(&grid, lp, &right_raise(&grid, l, &state.rho));
            let left = left_raise(&grid, l, &left_lower(&grid, lp, &state.rho));
            for (o, ((j, r), le)) in out.rho.iter_mut().zip(jump.iter().zip(&right).zip(&left)) {
                *o += g * (2.0 * j - r - le);
            }
        }
    }
    out
}

/// Damping matrix rotated into the composite basis, γ′ = O γ Oᵀ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeDamping {
    pub c_aa: f64,
    pub c_bb: f64,
    pub c_ab: f64,
}

impl CompositeDamping {
    /// Cross coefficient implied by the rotation, 2γ′_{αβ}, for comparison with C3.
    pub fn c3_from_rotation(&self) -> f64 {
        2.0 * self.c_ab
    }
}

pub fn rotate_loss_to_composite(params: &LaserParams) -> CompositeDamping {
    let o = composite_transform(params).rows;
    let gamma = [[params.gamma11, params.gamma12], [params.gamma12, params.gamma22]];
    let entry = |i: usize, j: usize| {
        let mut s = 0.0;
        for (k, gk) in gamma.iter().enumerate() {
            for (l, gkl) in gk.iter().enumerate() {
                s += o[i][k] * gkl * o[j][l];
            }
        }
        s
    };
    CompositeDamping { c_aa: entry(0, 0), c_bb: entry(1, 1), c_ab: entry(0, 1) }
}
