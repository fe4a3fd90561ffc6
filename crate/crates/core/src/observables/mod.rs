// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Photon statistics, closed-form limits, linewidth, frequency shift and the
//! Petermann factor.

mod measure;
mod report;

pub use measure::{measure_linewidth, LinewidthMeasurement};
pub use report::ObservableReport;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fock::PhotonDistribution;
use crate::params::{derive_coeffs, threshold_pump_rate, DerivedCoeffs, LaserParams};
use crate::steady::{solve_steady, BetaPolicy, SolveControls};

/// Mandel parameter Q = (⟨n²⟩ − n̄²)/n̄ − 1.
pub fn mandel_q(dist: &PhotonDistribution) -> Result<f64> {
    let (mean, second) = dist.moments();
    if mean <= 0.0 {
        return Err(Error::ZeroMean);
    }
    Ok((second - mean * mean) / mean - 1.0)
}

/// Equal-time intensity correlation g²(0) = Q/n̄ + 1.
pub fn g2_zero(dist: &PhotonDistribution) -> Result<f64> {
    let q = mandel_q(dist)?;
    Ok(q / dist.mean() + 1.0)
}

/// Thermal law (1 − x)xⁿ with x = A/C̃1, truncated at `n_max` and renormalized.
pub fn analytic_weak_pump(coeffs: &DerivedCoeffs, n_max: usize) -> Result<PhotonDistribution> {
    let x = coeffs.pump_ratio();
    if x >= 1.0 {
        return Err(Error::NotApplicable(format!("thermal law needs A < C̃1, got A/C̃1 = {x}")));
    }
    if x == 0.0 {
        return Ok(PhotonDistribution::vacuum(n_max));
    }
    let lw: Vec<f64> = (0..=n_max).map(|n| n as f64 * x.ln()).collect();
    Ok(PhotonDistribution::from_log_weights(&lw))
}

/// Boltzmann factor exp(−ħω̄/kT) of the effective temperature below threshold.
pub fn boltzmann_factor(coeffs: &DerivedCoeffs) -> f64 {
    coeffs.pump_ratio()
}

/// Saturated law p(n) ∝ (A²/BC1)ⁿ / Γ(n + Ã/B + 1), computed in log space.
pub fn analytic_strong_pump(coeffs: &DerivedCoeffs, n_max: usize) -> Result<PhotonDistribution> {
    if coeffs.pump_ratio() <= 1.0 {
        return Err(Error::NotApplicable("saturated law needs A > C̃1".into()));
    }
    if coeffs.b <= 0.0 {
        return Err(Error::NotApplicable("saturated law needs B > 0".into()));
    }
    let log_base = (coeffs.a * coeffs.a / (coeffs.b * coeffs.c1)).ln();
    let shift = coeffs.a_tilde() / coeffs.b + 1.0;
    let lw: Vec<f64> = (0..=n_max).map(|n| n as f64 * log_base - ln_gamma(n as f64 + shift)).collect();
    Ok(PhotonDistribution::from_log_weights(&lw))
}

/// Mean occupation far above threshold, (Ã/B)(A/C̃1 − 1).
pub fn analytic_nbar(coeffs: &DerivedCoeffs) -> Result<f64> {
    let x = coeffs.pump_ratio();
    if x < 1.0 || coeffs.b <= 0.0 {
        return Err(Error::NotApplicable(format!("below threshold (A/C̃1 = {x})")));
    }
    Ok(coeffs.a_tilde() / coeffs.b * (x - 1.0))
}

fn shift_denominator(coeffs: &DerivedCoeffs, nbar_alpha: f64) -> f64 {
    let ba = coeffs.b_over_a();
    coeffs.detuning_factor() + ba * (nbar_alpha + 1.5) + (ba / 4.0).powi(2)
}

/// Full linewidth 2Dα at mean occupation `nbar_alpha`.
pub fn linewidth(coeffs: &DerivedCoeffs, nbar_alpha: f64) -> f64 {
    let gain = (coeffs.a / (nbar_alpha + 1.0) + 2.0 * coeffs.b) / shift_denominator(coeffs, nbar_alpha);
    0.25 * (gain + coeffs.c1 / nbar_alpha)
}

/// Unsaturated resonant limit (A + C1)/(4n̄).
pub fn linewidth_limit(coeffs: &DerivedCoeffs, nbar_alpha: f64) -> f64 {
    (coeffs.a + coeffs.c1) / (4.0 * nbar_alpha)
}

/// Shift Δα of the emission frequency from the mean atomic frequency.
pub fn freq_shift(coeffs: &DerivedCoeffs, nbar_alpha: f64) -> f64 {
    -(coeffs.a * coeffs.delta_bar / 2.0) / shift_denominator(coeffs, nbar_alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PetermannMode {
    /// Ratio of linewidths at the two self-consistent occupations.
    Numeric,
    /// Closed form valid for B/A ≪ 1 and zero detuning.
    Asymptotic,
}

/// Pump rate putting the larger-threshold member of the (γ12, 0) pair at A = 2C̃1.
pub fn petermann_default_pump(params: &LaserParams) -> f64 {
    let open = threshold_pump_rate(params);
    let closed = threshold_pump_rate(&params.with_gamma12(0.0));
    2.0 * open.max(closed)
}

/// Linewidth broadening K = Dα(γ12)/Dα(0) at a common pump rate.
pub fn petermann(params: &LaserParams, pump_rate: f64, mode: PetermannMode) -> Result<f64> {
    let open = derive_coeffs(&params.with_pump_rate(pump_rate));
    let closed = derive_coeffs(&params.with_gamma12(0.0).with_pump_rate(pump_rate));
    for (label, c) in [("open", &open), ("closed", &closed)] {
        if c.pump_ratio() <= 1.0 {
            return Err(Error::NotApplicable(format!(
                "{label} configuration below threshold (A/C̃1 = {})",
                c.pump_ratio()
            )));
        }
    }
    if params.gamma12 == 0.0 {
        return Ok(1.0);
    }
    match mode {
        PetermannMode::Asymptotic => {
            let a = open.a;
            let (c1g, c10) = (open.c1, closed.c1);
            Ok(c1g * (a + c1g) * (a - c10) / (c10 * (a - c1g) * (a + c10)))
        }
        PetermannMode::Numeric => {
            let controls = SolveControls { beta: BetaPolicy::RecurrenceOrVacuum, ..Default::default() };
            let n_open = solve_steady(&open, &controls)?.nbar_alpha;
            let n_closed = solve_steady(&closed, &controls)?.nbar_alpha;
            Ok(linewidth(&open, n_open) / linewidth(&closed, n_closed))
        }
    }
}

/// Threshold pump rate at each γ12 of `gamma12_grid`, other parameters fixed.
pub fn threshold_curve(params: &LaserParams, gamma12_grid: &[f64]) -> Vec<(f64, f64)> {
    gamma12_grid.iter().map(|&g12| (g12, threshold_pump_rate(&params.with_gamma12(g12)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn calibration_distributions() {
        let poisson = PhotonDistribution::poisson(4.0, 80);
        assert!(mandel_q(&poisson).unwrap().abs() < 1e-9);
        assert!((g2_zero(&poisson).unwrap() - 1.0).abs() < 1e-9);
        let geometric = PhotonDistribution::thermal(1.0, 120);
        assert!((mandel_q(&geometric).unwrap() - 1.0).abs() < 1e-9);
        assert!((g2_zero(&PhotonDistribution::thermal(3.0, 400)).unwrap() - 2.0).abs() < 1e-6);
        assert!(matches!(mandel_q(&PhotonDistribution::vacuum(5)), Err(Error::ZeroMean)));
    }

    #[test]
    fn thermal_law_at_half_threshold() {
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(0.5));
        let p = analytic_weak_pump(&c, 80).unwrap();
        assert_relative_eq!(p.probs[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(p.mean(), 1.0, max_relative = 1e-10);
        assert_eq!(boltzmann_factor(&c), c.pump_ratio());
        let above = derive_coeffs(&LaserParams::reference().with_pump_ratio(1.5));
        assert!(analytic_weak_pump(&above, 10).is_err());
    }

    #[test]
    fn saturated_law_peak_and_mean() {
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(2.0));
        let p = analytic_strong_pump(&c, 1000).unwrap();
        let mode = p.probs.iter().enumerate().fold((0, 0.0), |b, (i, v)| if *v > b.1 { (i, *v) } else { b }).0;
        let expected = c.a * c.a / (c.b * c.c1) - c.a_tilde() / c.b;
        assert!((mode as f64 - expected).abs() <= 1.0, "{mode} vs {expected}");
        assert!((p.mean() / 337.84 - 1.0).abs() < 0.02);
        let q = mandel_q(&p).unwrap();
        let below_thermal = q < p.mean();
        assert!(q >= 0.0 && below_thermal);
        assert!((q - 1.0).abs() < 0.1, "{q}");
    }

    #[test]
    fn analytic_mean() {
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(2.0));
        assert_relative_eq!(analytic_nbar(&c).unwrap(), 10.0 / 0.0296, max_relative = 1e-12);
        let edge = derive_coeffs(&LaserParams::reference().with_pump_ratio(1.0));
        assert!(analytic_nbar(&edge).unwrap().abs() < 1e-9);
        let mut p = LaserParams::reference();
        p.g1 *= 2.0;
        p.g2 *= 2.0;
        let doubled = derive_coeffs(&p.with_pump_ratio(2.0));
        assert_relative_eq!(analytic_nbar(&doubled).unwrap() * 4.0, analytic_nbar(&c).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn linewidth_shape() {
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(2.0));
        assert!(linewidth(&c, 600.0) < linewidth(&c, 300.0));
        let resonant = derive_coeffs(&LaserParams::reference().with_delta(0.0).with_pump_ratio(2.0)).without_saturation();
        assert_relative_eq!(linewidth(&resonant, 1e12), linewidth_limit(&resonant, 1e12), max_relative = 1e-10);
    }

    #[test]
    fn shift_sign_opposes_detuning() {
        for delta in [-4.0, -0.5, 0.3, 3.0] {
            let c = derive_coeffs(&LaserParams::reference().with_delta(delta).with_pump_ratio(1.7));
            let s = freq_shift(&c, 120.0);
            assert_eq!(s.signum(), -delta.signum());
        }
        let c = derive_coeffs(&LaserParams::reference().with_delta(0.0).with_pump_ratio(1.7));
        assert_eq!(freq_shift(&c, 10.0), 0.0);
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(2.0));
        let ba = c.b / c.a;
        let by_hand = -(c.a * 3.0 / 2.0) / (10.0 + ba * (337.8 + 1.5) + (ba / 4.0).powi(2));
        assert_relative_eq!(freq_shift(&c, 337.8), by_hand, max_relative = 1e-12);
    }

    #[test]
    fn closed_cavity_has_unit_petermann_factor() {
        let p = LaserParams::reference().with_gamma12(0.0);
        let r = petermann_default_pump(&p);
        assert_eq!(petermann(&p, r, PetermannMode::Numeric).unwrap(), 1.0);
        assert_eq!(petermann(&p, r, PetermannMode::Asymptotic).unwrap(), 1.0);
        assert!(petermann(&LaserParams::reference(), 10.0, PetermannMode::Numeric).is_err());
    }

    #[test]
    fn threshold_curve_is_affine() {
        let t = threshold_curve(&LaserParams::reference(), &[0.0, 4.0, 8.0, 16.0]);
        let s1 = (t[1].1 - t[0].1) / 4.0;
        let s2 = (t[3].1 - t[2].1) / 8.0;
        assert_relative_eq!(s1, s2, max_relative = 1e-10);
        assert!(t.windows(2).all(|w| w[1].1 > w[0].1));
        let p = LaserParams::reference();
        let g2 = p.g1 * p.g1 + p.g2 * p.g2;
        let slope = 2.0 * (1.0 + 9.0) * (2.0 * p.g1 * p.g2 / g2) / (2.0 * g2);
        assert_relative_eq!(s1, slope, max_relative = 1e-10);
    }
}
