// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::{freq_shift, g2_zero, linewidth, mandel_q, petermann, PetermannMode};
use crate::error::Result;
use crate::params::{derive_coeffs, LaserParams};
use crate::steady::{solve_steady, solve_steady_from, SelfConsistentSolution, SolveControls};
use crate::fock::FockGrid;

/// Everything reported for one steady operating point. Quantities that are
/// undefined at that point (Q in vacuum, K below threshold) are NaN.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableReport {
    pub pump_rate: f64,
    pub pump_ratio: f64,
    pub gamma12: f64,
    pub nbar_alpha: f64,
    pub nbar_beta: f64,
    pub mandel_q_alpha: f64,
    pub g2_alpha: f64,
    pub linewidth_2d: f64,
    pub freq_shift: f64,
    pub petermann_k: f64,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta_bar: f64,
    pub iterations: usize,
    pub beta_fallback: bool,
}

impl ObservableReport {
    /// Solves the steady state of `params` and derives every observable.
    /// `grid` overrides the suggested starting grid.
    pub fn compute(
        params: &LaserParams,
        grid: Option<FockGrid>,
        controls: &SolveControls,
    ) -> Result<(Self, SelfConsistentSolution)> {
        let coeffs = derive_coeffs(params);
        let sol = match grid {
            Some(g) => solve_steady_from(&coeffs, g, controls)?,
            None => solve_steady(&coeffs, controls)?,
        };
        let nbar = sol.nbar_alpha;
        let (q, g2) = match (mandel_q(&sol.p_alpha), g2_zero(&sol.p_alpha)) {
            (Ok(q), Ok(g2)) => (q, g2),
            _ => (f64::NAN, f64::NAN),
        };
        let width = if nbar > 0.0 { linewidth(&coeffs, nbar) } else { f64::NAN };
        let k = petermann(params, params.pump_rate, PetermannMode::Numeric).unwrap_or(f64::NAN);
        let report = ObservableReport {
            pump_rate: params.pump_rate,
            pump_ratio: coeffs.pump_ratio(),
            gamma12: params.gamma12,
            nbar_alpha: nbar,
            nbar_beta: sol.nbar_beta,
            mandel_q_alpha: q,
            g2_alpha: g2,
            linewidth_2d: width,
            freq_shift: freq_shift(&coeffs, nbar),
            petermann_k: k,
            a: coeffs.a,
            b: coeffs.b,
            c1: coeffs.c1,
            c2: coeffs.c2,
            c3: coeffs.c3,
            delta_bar: coeffs.delta_bar,
            iterations: sol.iterations,
            beta_fallback: sol.beta_fallback,
        };
        Ok((report, sol))
    }
}
