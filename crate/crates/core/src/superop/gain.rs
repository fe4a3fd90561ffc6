// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::kick::KickOperators;
use super::quadrature::refinement_sequence;
use crate::error::{Error, Result};
use crate::fock::{CoherenceBlock, DiagonalState};
use crate::params::DerivedCoeffs;

const QUAD_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Quadrature,
}

/// Gain coefficients along one diagonal band m = n + offset of the α index.
///
/// `self_coeff[n]` multiplies ρ(n, m) and `feed[n]` multiplies ρ(n−1, m−1)
/// in dρ(n, m)/dt. Positions with m outside 0..=n_max hold zeros.
#[derive(Debug, Clone)]
pub struct GainKernel {
    pub provenance: Provenance,
    pub n_max: usize,
    pub offset: i64,
    pub self_coeff: Vec<Complex64>,
    pub feed: Vec<f64>,
}

impl GainKernel {
    fn partner(&self, n: usize) -> Option<usize> {
        let m = n as i64 + self.offset;
        (m >= 0 && m <= self.n_max as i64).then_some(m as usize)
    }

    /// Coefficients for the pair (n, m), if tabulated.
    pub fn coefficient(&self, n: usize, m: usize) -> Option<(Complex64, f64)> {
        (n <= self.n_max && self.partner(n) == Some(m)).then(|| (self.self_coeff[n], self.feed[n]))
    }

    /// Builds the band from the averaged coefficients in A, B, δ̄ form.
    pub fn closed_form(coeffs: &DerivedCoeffs, n_max: usize, offset: i64) -> Self {
        let (a, b) = (coeffs.a, coeffs.b);
        let ba = coeffs.b_over_a();
        let d0 = coeffs.detuning_factor();
        let mut kernel = GainKernel {
            provenance: Provenance::ClosedForm,
            n_max,
            offset,
            self_coeff: vec![Complex64::new(0.0, 0.0); n_max + 1],
            feed: vec![0.0; n_max + 1],
        };
        for n in 0..=n_max {
            let Some(m) = kernel.partner(n) else { continue };
            let (nf, mf) = (n as f64, m as f64);
            let diff = nf - mf;
            let spread = (ba / 4.0).powi(2) * diff * diff;
            let den_self = d0 + ba / 2.0 * (nf + mf + 2.0) + spread;
            let num = Complex64::new(a * (nf + mf + 2.0) / 2.0 + b * diff * diff / 8.0, a * coeffs.delta_bar * diff / 2.0);
            kernel.self_coeff[n] = -num / den_self;
            let den_feed = d0 + ba / 2.0 * (nf + mf) + spread;
            kernel.feed[n] = a * (nf * mf).sqrt() / den_feed;
        }
        kernel
    }

    /// Builds the band by averaging Λ(τ) − 1 over exponentially distributed τ.
    ///
    /// Rules are refined until successive tables agree to relative 1e-8.
    pub fn quadrature(coeffs: &DerivedCoeffs, n_max: usize, offset: i64) -> Result<Self> {
        let pump = if coeffs.a > 0.0 { coeffs.a / (2.0 * coeffs.g * coeffs.g) } else { 0.0 };
        let omega_max = 2.0 * (coeffs.g * coeffs.g * (n_max + 1) as f64 + 0.25 * coeffs.delta_bar.powi(2)).sqrt();
        let mut previous: Option<GainKernel> = None;
        let mut change = f64::INFINITY;
        for rule in refinement_sequence(omega_max) {
            let mut kernel = GainKernel {
                provenance: Provenance::Quadrature,
                n_max,
                offset,
                self_coeff: vec![Complex64::new(0.0, 0.0); n_max + 1],
                feed: vec![0.0; n_max + 1],
            };
            for (&tau, &w) in rule.nodes.iter().zip(&rule.weights) {
                let ops = KickOperators::new(coeffs, n_max, tau);
                for n in 0..=n_max {
                    let Some(m) = kernel.partner(n) else { continue };
                    let keep = ops.stay(n) * ops.stay(m).conj() - 1.0;
                    kernel.self_coeff[n] += w * pump * keep;
                    kernel.feed[n] += w * pump * ops.emit(n) * ops.emit(m);
                }
            }
            if let Some(prev) = &previous {
                change = kernel.max_relative_change(prev);
                if change < QUAD_RTOL {
                    return Ok(kernel);
                }
            }
            previous = Some(kernel);
        }
        Err(Error::Quadrature { change })
    }

    fn max_relative_change(&self, other: &GainKernel) -> f64 {
        let rel = |x: f64, y: f64| (x - y).abs() / (x.abs().max(y.abs()) + 1e-300);
        let mut worst: f64 = 0.0;
        for n in 0..=self.n_max {
            let (s, o) = (self.self_coeff[n], other.self_coeff[n]);
            if s.norm() > 0.0 || o.norm() > 0.0 {
                worst = worst.max((s - o).norm() / s.norm().max(o.norm()));
            }
            if self.feed[n] != 0.0 || other.feed[n] != 0.0 {
                worst = worst.max(rel(self.feed[n], other.feed[n]));
            }
        }
        worst
    }

    /// Gain contribution to dρ/dt for the diagonal sector (offset must be 0).
    pub fn apply_diag(&self, state: &DiagonalState) -> Vec<f64> {
        assert_eq!(self.offset, 0, "diagonal sector needs the offset-0 band");
        let grid = state.grid;
        let mut out = vec![0.0; grid.len()];
        for na in 0..=grid.n_max_alpha.min(self.n_max) {
            for nb in 0..=grid.n_max_beta {
                let mut v = self.self_coeff[na].re * state.get(na, nb);
                if na > 0 {
                    v += self.feed[na] * state.get(na - 1, nb);
                }
                out[grid.index(na, nb)] = v;
            }
        }
        out
    }

    /// Gain contribution to dρ/dt for a block whose k1 equals the band offset.
    pub fn apply_block(&self, block: &CoherenceBlock) -> Vec<Complex64> {
        assert_eq!(self.offset, block.k1, "band offset must match the block's alpha offset");
        let grid = block.grid;
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        for na in 0..=grid.n_max_alpha.min(self.n_max) {
            for nb in 0..=grid.n_max_beta {
                if !block.in_block(na, nb) {
                    continue;
                }
                let mut v = self.self_coeff[na] * block.get(na, nb);
                if na > 0 && block.in_block(na - 1, nb) {
                    v += self.feed[na] * block.get(na - 1, nb);
                }
                out[grid.index(na, nb)] = v;
            }
        }
        out
    }
}

/// r∫dτ e^{−τ}[Λ(τ) − 1]ρ for the diagonal sector, by quadrature.
pub fn gain_quadrature(state: &DiagonalState, coeffs: &DerivedCoeffs) -> Result<Vec<f64>> {
    let kernel = GainKernel::quadrature(coeffs, state.grid.n_max_alpha, 0)?;
    Ok(kernel.apply_diag(state))
}

/// Same average applied to a coherence block.
pub fn gain_quadrature_block(block: &CoherenceBlock, coeffs: &DerivedCoeffs) -> Result<Vec<Complex64>> {
    let kernel = GainKernel::quadrature(coeffs, block.grid.n_max_alpha, block.k1)?;
    Ok(kernel.apply_block(block))
}
