// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::params::DerivedCoeffs;

/// Evaluator for the M and K denominators at real-valued photon numbers.
#[derive(Debug, Clone, Copy)]
pub struct KMTable {
    coeffs: DerivedCoeffs,
}

impl KMTable {
    pub fn new(coeffs: &DerivedCoeffs) -> Self {
        KMTable { coeffs: *coeffs }
    }

    fn saturation_denominator(&self, n_alpha: f64) -> f64 {
        let ba = self.coeffs.b_over_a();
        self.coeffs.detuning_factor() + ba * (n_alpha + 0.5) + (ba / 4.0).powi(2)
    }

    pub fn m(&self, n_alpha: f64, n_beta: f64) -> f64 {
        let c = &self.coeffs;
        (c.a * (n_alpha + 0.5) + c.b / 4.0) / self.saturation_denominator(n_alpha)
            + c.c1 * (n_alpha - 0.5)
            + c.c2 * (n_beta - 0.5)
    }

    pub fn k(&self, n_alpha: f64, n_beta: f64) -> Result<f64> {
        let m = self.m(n_alpha, n_beta);
        if m <= 0.0 || !m.is_finite() {
            return Err(Error::DegenerateM { n_alpha, n_beta, value: m });
        }
        let shift = self.coeffs.delta_bar * self.coeffs.a / 2.0;
        let den = self.saturation_denominator(n_alpha);
        Ok(m + shift * shift / (den * den) / m)
    }
}

pub fn k_factor(n_alpha: f64, n_beta: f64, coeffs: &DerivedCoeffs) -> Result<f64> {
    KMTable::new(coeffs).k(n_alpha, n_beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_coeffs, LaserParams};
    use approx::assert_relative_eq;

    #[test]
    fn resonant_k_equals_m() {
        let c = derive_coeffs(&LaserParams::reference().with_delta(0.0).with_pump_rate(5000.0));
        let t = KMTable::new(&c);
        for (na, nb) in [(1.0, 1.0), (7.5, 0.3), (120.0, 2.0)] {
            assert_eq!(t.k(na, nb).unwrap(), t.m(na, nb));
        }
    }

    #[test]
    fn detuning_correction_is_small_far_above_threshold() {
        let c = derive_coeffs(&LaserParams::reference().with_pump_ratio(2.0));
        let t = KMTable::new(&c);
        let m = t.m(338.0, 0.0);
        let k = t.k(338.0, 0.0).unwrap();
        assert!(k > m);
        assert!((k - m) / m < 0.01);
        // M by hand: [A·338.5 + B/4] / [10 + 0.0296·338.5 + 0.0074²] + C1·337.5 − C2/2
        let den = 10.0 + 0.0296 * 338.5 + 0.0074f64.powi(2);
        let by_hand = (c.a * 338.5 + c.b / 4.0) / den + c.c1 * 337.5 - c.c2 * 0.5;
        assert_relative_eq!(m, by_hand, max_relative = 1e-12);
    }

    #[test]
    fn negative_m_is_an_error() {
        // Large C2 against small nα: M(0, 0) = A/2/D − C1/2 − C2/2 < 0.
        let c = derive_coeffs(&LaserParams::reference().with_pump_rate(10.0));
        assert!(matches!(k_factor(0.0, 0.0, &c), Err(Error::DegenerateM { .. })));
    }
}
