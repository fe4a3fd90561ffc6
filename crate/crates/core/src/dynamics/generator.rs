// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use crate::error::Result;
use crate::fock::{check_offsets, FockGrid};
use crate::params::DerivedCoeffs;
use crate::steady::KMTable;

/// Treatment of transfers that would leave the truncated grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Dropped from the target and from the source's outflow: trace is conserved.
    #[default]
    Reflecting,
    /// Dropped from the target only: probability leaks through the edge.
    Absorbing,
}

/// Source offsets (Δnα, Δnβ) relative to the target row, in coupling-slot order.
pub const DIAG_STENCIL: [(i64, i64); 7] = [(-1, 0), (1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1)];

/// Generator of the diagonal sector on a truncated grid.
///
/// `couplings[t][j]` multiplies ρ at `sources[t][j]` = t + `DIAG_STENCIL[j]`;
/// slots pointing off the grid hold a zero coefficient and t itself as index.
#[derive(Debug, Clone)]
pub struct GeneratorDiag {
    pub grid: FockGrid,
    pub coeffs: DerivedCoeffs,
    pub boundary: Boundary,
    pub self_term: Vec<f64>,
    pub couplings: Vec<[f64; 7]>,
    pub sources: Vec<[usize; 7]>,
}

/// Printed row coefficients at an arbitrary (non-negative) target.
struct DiagRow<'a> {
    c: &'a DerivedCoeffs,
    km: KMTable,
    s: f64,
}

impl DiagRow<'_> {
    /// prefactor · C3² / K(na, nb), skipping K whenever the prefactor vanishes.
    fn c3_term(&self, prefactor: f64, na: f64, nb: f64) -> Result<f64> {
        if self.s == 0.0 || prefactor == 0.0 {
            return Ok(0.0);
        }
        Ok(prefactor * self.s / self.km.k(na, nb)?)
    }

    fn gain(&self, n: f64) -> f64 {
        self.c.a * n / (self.c.detuning_factor() + self.c.b_over_a() * n)
    }

    fn self_term(&self, a: f64, b: f64) -> Result<f64> {
        let out = self.gain(a + 1.0) + self.c.c1 * a + self.c.c2 * b
            - self.c3_term(2.0 * (a + 1.0) * b, a + 1.0, b)?
            - self.c3_term(2.0 * a * (b + 1.0), a, b + 1.0)?;
        Ok(-out)
    }

    fn coupling(&self, slot: usize, a: f64, b: f64) -> Result<f64> {
        let c = self.c;
        Ok(match DIAG_STENCIL[slot] {
            (-1, 0) => self.gain(a),
            (1, 0) => {
                c.c1 * (a + 1.0)
                    - self.c3_term(4.0 * (a + 1.0) * (b + 1.0), a + 1.0, b + 1.0)?
                    - self.c3_term(4.0 * (a + 1.0) * b, a + 1.0, b)?
            }
            (0, 1) => {
                c.c2 * (b + 1.0)
                    - self.c3_term(4.0 * (a + 1.0) * (b + 1.0), a + 1.0, b + 1.0)?
                    - self.c3_term(4.0 * a * (b + 1.0), a, b + 1.0)?
            }
            (0, -1) => 0.0,
            (1, 1) => self.c3_term(8.0 * (a + 1.0) * (b + 1.0), a + 1.0, b + 1.0)?,
            (1, -1) => self.c3_term(2.0 * (a + 1.0) * b, a + 1.0, b)?,
            (-1, 1) => self.c3_term(2.0 * a * (b + 1.0), a, b + 1.0)?,
            _ => unreachable!(),
        })
    }
}

pub fn build_diag_generator(grid: FockGrid, coeffs: &DerivedCoeffs) -> Result<GeneratorDiag> {
    build_diag_generator_with(grid, coeffs, Boundary::Reflecting)
}

#[allow(clippy::needless_range_loop)]
pub fn build_diag_generator_with(grid: FockGrid, coeffs: &DerivedCoeffs, boundary: Boundary) -> Result<GeneratorDiag> {
    let row = DiagRow { c: coeffs, km: KMTable::new(coeffs), s: coeffs.c3 * coeffs.c3 };
    let n = grid.len();
    let mut self_term = vec![0.0; n];
    let mut couplings = vec![[0.0; 7]; n];
    let mut sources = vec![[0usize; 7]; n];
    for t in 0..n {
        let (a, b) = grid.coords(t);
        let (af, bf) = (a as f64, b as f64);
        self_term[t] = row.self_term(af, bf)?;
        for (j, &(da, db)) in DIAG_STENCIL.iter().enumerate() {
            match grid.checked_index(a as i64 + da, b as i64 + db) {
                Some(s) => {
                    couplings[t][j] = row.coupling(j, af, bf)?;
                    sources[t][j] = s;
                }
                None => sources[t][j] = t,
            }
        }
    }
    if boundary == Boundary::Reflecting {
        // Return outflow aimed past the top edges to its source.
        for s in 0..n {
            let (a, b) = grid.coords(s);
            for (j, &(da, db)) in DIAG_STENCIL.iter().enumerate() {
                let (ta, tb) = (a as i64 - da, b as i64 - db);
                if ta < 0 || tb < 0 || grid.checked_index(ta, tb).is_some() {
                    continue;
                }
                self_term[s] += row.coupling(j, ta as f64, tb as f64)?;
            }
        }
    }
    Ok(GeneratorDiag { grid, coeffs: *coeffs, boundary, self_term, couplings, sources })
}

impl GeneratorDiag {
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (t, o) in out.iter_mut().enumerate() {
            let c = &self.couplings[t];
            let s = &self.sources[t];
            let mut v = self.self_term[t] * x[t];
            for j in 0..7 {
                v += c[j] * x[s[j]];
            }
            *o = v;
        }
    }

    /// Σ over targets of each column (one entry per source state).
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = self.self_term.clone();
        for (t, c) in self.couplings.iter().enumerate() {
            for j in 0..7 {
                if self.sources[t][j] != t {
                    sums[self.sources[t][j]] += c[j];
                }
            }
        }
        sums
    }

    /// Nodes whose every outflow target lies on the grid.
    pub fn is_interior(&self, index: usize) -> bool {
        let (a, b) = self.grid.coords(index);
        a < self.grid.n_max_alpha && b < self.grid.n_max_beta
    }

    pub fn max_rate(&self) -> f64 {
        self.self_term.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Coherence-block generator for a fixed offset (k1, k2).
///
/// `couplings[t]` holds the in-block sources in the order gain (nα−1),
/// C1 (nα+1), C2 (nβ+1). `cross[t]` records the C3 terms, which couple to the
/// neighbouring blocks (k1−1, k2+1) in slots 0..3 and (k1+1, k2−1) in slots 3..6;
/// they are kept for inspection and not applied.
#[derive(Debug, Clone)]
pub struct GeneratorCoherence {
    pub grid: FockGrid,
    pub coeffs: DerivedCoeffs,
    pub k1: i64,
    pub k2: i64,
    pub boundary: Boundary,
    pub active: Vec<bool>,
    pub self_term: Vec<Complex64>,
    pub couplings: Vec<[f64; 3]>,
    pub sources: Vec<[usize; 3]>,
    pub cross: Vec<[f64; 6]>,
}

pub const BLOCK_STENCIL: [(i64, i64); 3] = [(-1, 0), (1, 0), (0, 1)];

fn block_gain_self(c: &DerivedCoeffs, n: f64, m: f64) -> Complex64 {
    let ba = c.b_over_a();
    let d = n - m;
    let den = c.detuning_factor() + ba / 2.0 * (n + m + 2.0) + (ba / 4.0).powi(2) * d * d;
    -Complex64::new(c.a * (n + m + 2.0) / 2.0 + c.b * d * d / 8.0, c.a * c.delta_bar * d / 2.0) / den
}

fn block_gain_feed(c: &DerivedCoeffs, n: f64, m: f64) -> f64 {
    let ba = c.b_over_a();
    let d = n - m;
    let den = c.detuning_factor() + ba / 2.0 * (n + m) + (ba / 4.0).powi(2) * d * d;
    c.a * (n * m).sqrt() / den
}

pub fn build_coherence_generator(grid: FockGrid, coeffs: &DerivedCoeffs, k1: i64, k2: i64) -> Result<GeneratorCoherence> {
    build_coherence_generator_with(grid, coeffs, k1, k2, Boundary::Reflecting)
}

pub fn build_coherence_generator_with(
    grid: FockGrid,
    coeffs: &DerivedCoeffs,
    k1: i64,
    k2: i64,
    boundary: Boundary,
) -> Result<GeneratorCoherence> {
    check_offsets(&grid, k1, k2)?;
    let c = coeffs;
    let n = grid.len();
    let mut gen = GeneratorCoherence {
        grid,
        coeffs: *coeffs,
        k1,
        k2,
        boundary,
        active: vec![false; n],
        self_term: vec![Complex64::new(0.0, 0.0); n],
        couplings: vec![[0.0; 3]; n],
        sources: vec![[0usize; 3]; n],
        cross: vec![[0.0; 6]; n],
    };
    for t in 0..n {
        let (na, nb) = grid.coords(t);
        let (ma, mb) = (na as i64 + k1, nb as i64 + k2);
        gen.sources[t] = [t; 3];
        if grid.checked_index(ma, mb).is_none() {
            continue;
        }
        gen.active[t] = true;
        let (a, b, ma, mb) = (na as f64, nb as f64, ma as f64, mb as f64);
        let mut diag = block_gain_self(c, a, ma) - c.c1 * (a + ma) / 2.0 - c.c2 * (b + mb) / 2.0;
        if boundary == Boundary::Reflecting && (na == grid.n_max_alpha || ma as usize == grid.n_max_alpha) {
            diag += block_gain_feed(c, a + 1.0, ma + 1.0);
        }
        gen.self_term[t] = diag;
        let values = [
            block_gain_feed(c, a, ma),
            c.c1 * ((a + 1.0) * (ma + 1.0)).sqrt(),
            c.c2 * ((b + 1.0) * (mb + 1.0)).sqrt(),
        ];
        for (j, &(da, db)) in BLOCK_STENCIL.iter().enumerate() {
            let src = (na as i64 + da, nb as i64 + db);
            let partner = (src.0 + k1, src.1 + k2);
            if let (Some(s), Some(_)) = (grid.checked_index(src.0, src.1), grid.checked_index(partner.0, partner.1)) {
                gen.couplings[t][j] = values[j];
                gen.sources[t][j] = s;
            }
        }
        let c3 = c.c3;
        gen.cross[t] = [
            2.0 * c3 * ((a + 1.0) * (mb + 1.0)).sqrt(),
            -c3 * (ma * (mb + 1.0)).sqrt(),
            -c3 * ((a + 1.0) * b).sqrt(),
            2.0 * c3 * ((b + 1.0) * (ma + 1.0)).sqrt(),
            -c3 * ((ma + 1.0) * mb).sqrt(),
            -c3 * (a * (b + 1.0)).sqrt(),
        ];
    }
    Ok(gen)
}

impl GeneratorCoherence {
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (t, o) in out.iter_mut().enumerate() {
            if !self.active[t] {
                *o = Complex64::new(0.0, 0.0);
                continue;
            }
            let c = &self.couplings[t];
            let s = &self.sources[t];
            *o = self.self_term[t] * x[t] + c[0] * x[s[0]] + c[1] * x[s[1]] + c[2] * x[s[2]];
        }
    }

    pub fn max_rate(&self) -> f64 {
        self.self_term.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}
