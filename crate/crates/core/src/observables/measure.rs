// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::{freq_shift, linewidth};
use crate::dynamics::{build_coherence_generator, fit_decay, integrate_block_implicit, DecayFit, Trajectory};
use crate::error::{Error, Result};
use crate::fock::{CoherenceBlock, FockGrid};
use crate::params::DerivedCoeffs;
use crate::steady::SelfConsistentSolution;

const STEPS: usize = 20_000;
const SAMPLES: usize = 2_000;

/// Linewidth and frequency shift read off the decay of the first α coherence.
#[derive(Debug, Clone)]
pub struct LinewidthMeasurement {
    pub fit: DecayFit,
    /// Full width 2·(decay rate).
    pub fwhm: f64,
    /// Oscillation frequency of the coherence, same sign convention as `freq_shift`.
    pub shift: f64,
    pub predicted_linewidth: f64,
    pub predicted_shift: f64,
    pub nbar_alpha: f64,
    /// Block sum in the co-rotating frame.
    pub trajectory: Trajectory,
}

/// Seeds the (1,0) block with √(p(n)p(n+1)) from a steady solution, integrates
/// it, and fits the decay of its entry sum.
pub fn measure_linewidth(coeffs: &DerivedCoeffs, steady: &SelfConsistentSolution) -> Result<LinewidthMeasurement> {
    let nbar = steady.nbar_alpha;
    if nbar <= 0.0 {
        return Err(Error::ZeroMean);
    }
    let p = &steady.p_alpha.probs;
    // The β sum is conserved inside a k2 = 0 block, so one β level is enough.
    let grid = FockGrid::new(steady.grid.n_max_alpha, 1)?;
    let mut block = CoherenceBlock::zeros(grid, 1, 0)?;
    for n in 0..grid.n_max_alpha {
        block.set(n, 0, Complex64::new((p[n] * p[n + 1]).sqrt(), 0.0));
    }
    let gen = build_coherence_generator(grid, coeffs, 1, 0)?;

    let predicted_linewidth = linewidth(coeffs, nbar);
    let predicted_shift = freq_shift(coeffs, nbar);
    // Decay to 1e-3 of the start needs about 7/rate; allow for a rate twice as slow.
    let t_end = 14.0 / (predicted_linewidth / 2.0);
    // Work in a frame co-rotating with the predicted oscillation; the fit then
    // sees only the residual frequency, which is added back below.
    let frame = -predicted_shift;
    let trajectory = integrate_block_implicit(&gen, block.values, t_end, t_end / STEPS as f64, STEPS / SAMPLES, frame)?;
    let mut fit = fit_decay(&trajectory)?;
    fit.frequency += frame;
    Ok(LinewidthMeasurement {
        fit,
        fwhm: 2.0 * fit.rate,
        shift: -fit.frequency,
        predicted_linewidth,
        predicted_shift,
        nbar_alpha: nbar,
        trajectory,
    })
}
