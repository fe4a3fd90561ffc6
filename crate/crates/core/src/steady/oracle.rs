// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Direct null-space solve of the diagonal generator, used to cross-check the
//! factorized recurrences when the cross-damping term couples the modes.

use crate::dynamics::GeneratorDiag;
use crate::error::{Error, Result};
use crate::fock::DiagonalState;

/// Largest grid the dense-band factorization accepts.
pub const ORACLE_SIZE_LIMIT: usize = 200_000;

/// Banded matrix with room for the fill-in of partial pivoting.
struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Gaussian elimination with partial pivoting on a single right-hand side.
    /// Pivots below `tiny` mean the system has no unique solution.
    #[allow(clippy::needless_range_loop)]
    fn solve(mut self, mut rhs: Vec<f64>, tiny: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut p = k;
            for i in k + 1..=last_row {
                if self.get(i, k).abs() > self.get(p, k).abs() {
                    p = i;
                }
            }
            let pivot = self.get(p, k);
            if pivot.abs() <= tiny {
                return Err(Error::DegenerateSteadyState(format!(
                    "zero pivot at state {k}: the stationary state is not unique"
                )));
            }
            if p != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
                rhs.swap(k, p);
            }
            for i in k + 1..=last_row {
                let f = self.get(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                self.set(i, k, 0.0);
                for j in k + 1..=last_col {
                    let v = self.get(k, j);
                    if v != 0.0 {
                        self.add(i, j, -f * v);
                    }
                }
                rhs[i] -= f * rhs[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                acc -= self.get(i, j) * x[j];
            }
            x[i] = acc / self.get(i, i);
        }
        Ok(x)
    }
}

/// Stationary diagonal state of `gen`, found by pinning the vacuum entry and
/// solving the remaining balance equations exactly.
pub fn liouvillian_steady_oracle(gen: &GeneratorDiag) -> Result<DiagonalState> {
    let grid = gen.grid;
    let n = grid.len();
    if n > ORACLE_SIZE_LIMIT {
        return Err(Error::GridTooLarge { size: n, limit: ORACLE_SIZE_LIMIT });
    }
    // Couplings reach at most one step in each mode, i.e. nβ_max + 2 in flat index.
    let bw = grid.n_max_beta + 2;
    let mut m = BandMatrix::new(n, bw, bw);
    let mut scale: f64 = 0.0;
    for t in 0..n {
        if t == 0 {
            continue;
        }
        m.add(t, t, gen.self_term[t]);
        scale = scale.max(gen.self_term[t].abs());
        for (c, &s) in gen.couplings[t].iter().zip(&gen.sources[t]) {
            if *c != 0.0 {
                m.add(t, s, *c);
                scale = scale.max(c.abs());
            }
        }
    }
    m.add(0, 0, 1.0);
    let mut rhs = vec![0.0; n];
    rhs[0] = 1.0;
    let x = m.solve(rhs, 1e-13 * scale.max(1.0))?;
    let total: f64 = x.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::DegenerateSteadyState(format!("stationary vector has total {total}")));
    }
    DiagonalState::from_values(grid, x.into_iter().map(|v| v / total).collect())
}
