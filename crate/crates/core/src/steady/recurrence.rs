// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use super::km::KMTable;
use crate::error::{Error, Mode, Result};
use crate::fock::{suggest_grid, FockGrid, PhotonDistribution};
use crate::params::DerivedCoeffs;

const TAIL_TOL: f64 = 1e-8;

/// How the β mode enters the self-consistent loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaPolicy {
    /// Solve the β recurrence; its errors propagate.
    #[default]
    Recurrence,
    /// Keep the β mode in vacuum.
    Vacuum,
    /// Solve the β recurrence, falling back to vacuum when it is unphysical.
    RecurrenceOrVacuum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveControls {
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: f64,
    pub beta: BetaPolicy,
    /// Grid doublings allowed when a tail check fails.
    pub regrow_retries: usize,
}

impl Default for SolveControls {
    fn default() -> Self {
        SolveControls { tol: 1e-8, max_iter: 200, relaxation: 0.5, beta: BetaPolicy::Recurrence, regrow_retries: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct SelfConsistentSolution {
    pub p_alpha: PhotonDistribution,
    pub p_beta: PhotonDistribution,
    pub nbar_alpha: f64,
    pub nbar_beta: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The β recurrence was unphysical and the vacuum was used instead.
    pub beta_fallback: bool,
    pub grid: FockGrid,
}

fn check_tail(p: &PhotonDistribution, mode: Mode) -> Result<()> {
    let tail = p.tail_mass();
    if tail > TAIL_TOL {
        return Err(Error::GridTooSmall { mode, n_max: p.n_max(), tail });
    }
    Ok(())
}

/// α distribution from its two-term recurrence at a fixed mean β occupation.
pub fn solve_alpha_recurrence(coeffs: &DerivedCoeffs, nbar_beta: f64, grid: FockGrid) -> Result<PhotonDistribution> {
    let km = KMTable::new(coeffs);
    let s = coeffs.c3 * coeffs.c3;
    let d0 = coeffs.detuning_factor();
    let ba = coeffs.b_over_a();
    let mut log_p = Vec::with_capacity(grid.n_max_alpha + 1);
    log_p.push(0.0);
    for n in 1..=grid.n_max_alpha {
        let nf = n as f64;
        let mut num = coeffs.a / (d0 + ba * nf);
        let mut den = coeffs.c1;
        if s > 0.0 {
            den -= 2.0 * s * (nbar_beta + 1.0) / km.k(nf, nbar_beta + 1.0)?;
            if nbar_beta > 0.0 {
                let k0 = km.k(nf, nbar_beta)?;
                num += 2.0 * s * nbar_beta / k0;
                den += 4.0 * s * nbar_beta / k0;
            }
        }
        if den <= 0.0 {
            return Err(Error::AlphaDenominator { n, value: den });
        }
        log_p.push(log_p[n - 1] + (num / den).ln());
    }
    let p = PhotonDistribution::from_log_weights(&log_p);
    check_tail(&p, Mode::Alpha)?;
    Ok(p)
}

/// β distribution from its two-term recurrence at a fixed mean α occupation.
pub fn solve_beta_recurrence(coeffs: &DerivedCoeffs, nbar_alpha: f64, grid: FockGrid) -> Result<PhotonDistribution> {
    let s = coeffs.c3 * coeffs.c3;
    if s == 0.0 || nbar_alpha == 0.0 {
        return Ok(PhotonDistribution::vacuum(grid.n_max_beta));
    }
    let km = KMTable::new(coeffs);
    let mut log_p = Vec::with_capacity(grid.n_max_beta + 1);
    log_p.push(0.0);
    for n in 1..=grid.n_max_beta {
        let nf = n as f64;
        let k0 = km.k(nbar_alpha, nf)?;
        let k1 = km.k(nbar_alpha + 1.0, nf)?;
        let num = 2.0 * s * nbar_alpha / k0;
        let den = coeffs.c2 - 2.0 * s * ((nbar_alpha + 1.0) / k1 - 2.0 * nbar_alpha / k0);
        if den <= 0.0 {
            return Err(Error::UnphysicalDamping { n, value: den });
        }
        let ratio = num / den;
        if ratio >= 1.0 {
            return Err(Error::NonNormalizable { n, ratio });
        }
        log_p.push(log_p[n - 1] + ratio.ln());
    }
    let p = PhotonDistribution::from_log_weights(&log_p);
    check_tail(&p, Mode::Beta)?;
    Ok(p)
}

fn beta_step(
    coeffs: &DerivedCoeffs,
    nbar_alpha: f64,
    grid: FockGrid,
    policy: BetaPolicy,
) -> Result<(PhotonDistribution, bool)> {
    match policy {
        BetaPolicy::Vacuum => Ok((PhotonDistribution::vacuum(grid.n_max_beta), false)),
        BetaPolicy::Recurrence => Ok((solve_beta_recurrence(coeffs, nbar_alpha, grid)?, false)),
        BetaPolicy::RecurrenceOrVacuum => match solve_beta_recurrence(coeffs, nbar_alpha, grid) {
            Ok(p) => Ok((p, false)),
            Err(Error::UnphysicalDamping { .. } | Error::NonNormalizable { .. } | Error::DegenerateM { .. }) => {
                Ok((PhotonDistribution::vacuum(grid.n_max_beta), true))
            }
            Err(e) => Err(e),
        },
    }
}

/// Damped fixed-point iteration on (n̄α, n̄β) with default controls.
pub fn self_consistent_solve(coeffs: &DerivedCoeffs, grid: FockGrid) -> Result<SelfConsistentSolution> {
    self_consistent_solve_with(coeffs, grid, &SolveControls::default())
}

pub fn self_consistent_solve_with(
    coeffs: &DerivedCoeffs,
    grid: FockGrid,
    controls: &SolveControls,
) -> Result<SelfConsistentSolution> {
    let mut nbar_beta = 0.0;
    let mut residual = f64::INFINITY;
    for iteration in 1..=controls.max_iter {
        let p_alpha = solve_alpha_recurrence(coeffs, nbar_beta, grid)?;
        let nbar_alpha = p_alpha.mean();
        let (p_beta, beta_fallback) = beta_step(coeffs, nbar_alpha, grid, controls.beta)?;
        let target = p_beta.mean();
        let next = (1.0 - controls.relaxation) * nbar_beta + controls.relaxation * target;
        residual = (next - nbar_beta).abs();
        nbar_beta = next;
        if residual < controls.tol * (1.0 + nbar_beta) {
            return Ok(SelfConsistentSolution {
                p_alpha,
                p_beta,
                nbar_alpha,
                nbar_beta,
                iterations: iteration,
                converged: true,
                beta_fallback,
                grid,
            });
        }
    }
    Err(Error::NoConvergence { iterations: controls.max_iter, residual })
}

/// Self-consistent solve on a suggested grid, doubling a cutoff whenever its tail check fails.
pub fn solve_steady(coeffs: &DerivedCoeffs, controls: &SolveControls) -> Result<SelfConsistentSolution> {
    solve_steady_from(coeffs, suggest_grid(coeffs), controls)
}

pub fn solve_steady_from(
    coeffs: &DerivedCoeffs,
    mut grid: FockGrid,
    controls: &SolveControls,
) -> Result<SelfConsistentSolution> {
    let mut retries = 0;
    loop {
        match self_consistent_solve_with(coeffs, grid, controls) {
            Err(Error::GridTooSmall { mode, .. }) if retries < controls.regrow_retries => {
                match mode {
                    Mode::Alpha => grid.n_max_alpha *= 2,
                    Mode::Beta => grid.n_max_beta *= 2,
                }
                retries += 1;
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_coeffs, LaserParams};
    use approx::assert_relative_eq;

    fn no_cross_term(ratio: f64) -> DerivedCoeffs {
        let p = LaserParams { g1: 0.06, g2: 0.06, delta: 2.0, gamma11: 5.0, gamma22: 5.0, gamma12: 2.0, pump_rate: 0.0 };
        let c = derive_coeffs(&p.with_pump_ratio(ratio));
        assert_eq!(c.c3, 0.0);
        c
    }

    #[test]
    fn thermal_law_without_saturation_or_cross_term() {
        let c = no_cross_term(0.5).without_saturation();
        let p = solve_alpha_recurrence(&c, 0.0, FockGrid::new(60, 1).unwrap()).unwrap();
        let x = c.a / c.c1_tilde();
        let norm = (1.0 - x.powi(61)) / (1.0 - x);
        for (n, v) in p.probs.iter().enumerate() {
            assert_relative_eq!(*v, x.powi(n as i32) / norm, max_relative = 1e-12);
        }
    }

    #[test]
    fn flux_balance_without_cross_term() {
        let c = no_cross_term(1.6);
        let sol = solve_steady(&c, &SolveControls::default()).unwrap();
        let p = &sol.p_alpha.probs;
        for n in 1..p.len() {
            let nf = n as f64;
            let gain = c.a * nf * p[n - 1] / (c.detuning_factor() + c.b_over_a() * nf);
            let loss = c.c1 * nf * p[n];
            if gain > 1e-250 {
                assert_relative_eq!(gain, loss, max_relative = 1e-10);
            }
        }
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.nbar_beta, 0.0);
        assert_eq!(sol.p_beta.probs[0], 1.0);
    }

    #[test]
    fn beta_vacuum_cases() {
        let c = no_cross_term(2.0);
        let g = FockGrid::new(10, 10).unwrap();
        assert_eq!(solve_beta_recurrence(&c, 50.0, g).unwrap().probs[0], 1.0);
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(2.0));
        assert_eq!(solve_beta_recurrence(&c, 0.0, g).unwrap().probs[0], 1.0);
    }

    #[test]
    fn reference_above_threshold() {
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(2.0));
        let sol = solve_steady(&c, &SolveControls::default()).unwrap();
        let analytic = 10.0 / 0.0296;
        assert!((sol.nbar_alpha / analytic - 1.0).abs() < 0.02, "{}", sol.nbar_alpha);
        assert!(sol.nbar_beta / sol.nbar_alpha < 1e-2);
        assert!(sol.converged);
    }

    #[test]
    fn reference_below_threshold() {
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(0.5));
        let sol = solve_steady(&c, &SolveControls::default()).unwrap();
        assert!((sol.nbar_alpha - 1.0).abs() < 0.1, "{}", sol.nbar_alpha);
    }

    #[test]
    fn small_grid_is_reported() {
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(2.0));
        let r = solve_alpha_recurrence(&c, 0.0, FockGrid::new(100, 1).unwrap());
        assert!(matches!(r, Err(Error::GridTooSmall { mode: Mode::Alpha, .. })));
    }

    #[test]
    fn strongly_coupled_beta_is_unphysical() {
        let c = derive_coeffs(&LaserParams::reference().with_gamma12(16.0).with_pump_ratio(2.0));
        let r = solve_beta_recurrence(&c, 300.0, FockGrid::new(10, 10).unwrap());
        assert!(matches!(r, Err(Error::UnphysicalDamping { .. } | Error::DegenerateM { .. })));
        let controls = SolveControls { beta: BetaPolicy::RecurrenceOrVacuum, ..Default::default() };
        let sol = solve_steady(&c, &controls).unwrap();
        assert!(sol.beta_fallback);
        assert_eq!(sol.nbar_beta, 0.0);
    }
}
