// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Physical inputs and the working coefficients derived from them.
//!
//! Every rate is expressed in units of the inverse mean interaction time Γ,
//! which is fixed to 1.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Raw physical inputs. The damping matrix is symmetric by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaserParams {
    pub g1: f64,
    pub g2: f64,
    pub delta: f64,
    pub gamma11: f64,
    pub gamma22: f64,
    pub gamma12: f64,
    pub pump_rate: f64,
}

impl LaserParams {
    /// Reference two-mode cavity: g1 = 0.05, g2 = 0.07, δ = 3, γ11 = 6,
    /// γ22 = 5, γ12 = 5.5, with the pump switched off.
    pub fn reference() -> Self {
        LaserParams {
            g1: 0.05,
            g2: 0.07,
            delta: 3.0,
            gamma11: 6.0,
            gamma22: 5.0,
            gamma12: 5.5,
            pump_rate: 0.0,
        }
    }

    pub fn with_pump_rate(mut self, pump_rate: f64) -> Self {
        self.pump_rate = pump_rate;
        self
    }

    pub fn with_gamma12(mut self, gamma12: f64) -> Self {
        self.gamma12 = gamma12;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Sets the pump so that A / C̃1 equals `ratio`.
    pub fn with_pump_ratio(self, ratio: f64) -> Self {
        let r = ratio * threshold_pump_rate(&self);
        self.with_pump_rate(r)
    }

    /// Collective coupling squared, g² = g1² + g2².
    pub fn coupling_sq(&self) -> f64 {
        self.g1 * self.g1 + self.g2 * self.g2
    }
}

/// Non-fatal diagnostics attached by [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamWarning {
    /// The β-mode damping coefficient is not positive.
    NonPositiveC2 { c2: f64 },
    /// γ12² exceeds γ11·γ22, so the damping matrix is not positive semidefinite.
    NotPositiveSemidefinite { gamma12_sq: f64, product: f64 },
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::NonPositiveC2 { c2 } => {
                write!(f, "C2 = {c2} <= 0: beta-mode damping is unphysical")
            }
            ParamWarning::NotPositiveSemidefinite { gamma12_sq, product } => write!(
                f,
                "damping matrix not positive semidefinite (gamma12^2 = {gamma12_sq} > gamma11*gamma22 = {product})"
            ),
        }
    }
}

/// Parameters that passed validation, with any warnings raised on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub params: LaserParams,
    pub warnings: Vec<ParamWarning>,
}

pub fn validate_params(raw: LaserParams) -> Result<Validated> {
    let finite = [
        ("g1", raw.g1),
        ("g2", raw.g2),
        ("delta", raw.delta),
        ("gamma11", raw.gamma11),
        ("gamma22", raw.gamma22),
        ("gamma12", raw.gamma12),
        ("pump_rate", raw.pump_rate),
    ];
    for (name, v) in finite {
        if !v.is_finite() {
            return Err(Error::InvalidParam { name, reason: format!("{v} is not finite") });
        }
    }
    for (name, v) in [("g1", raw.g1), ("g2", raw.g2), ("gamma11", raw.gamma11), ("gamma22", raw.gamma22)] {
        if v <= 0.0 {
            return Err(Error::InvalidParam { name, reason: format!("{v} must be positive") });
        }
    }
    if raw.pump_rate < 0.0 {
        return Err(Error::InvalidParam {
            name: "pump_rate",
            reason: format!("{} must be non-negative", raw.pump_rate),
        });
    }

    let mut warnings = Vec::new();
    let c = derive_coeffs(&raw);
    if c.c2 <= 0.0 {
        warnings.push(ParamWarning::NonPositiveC2 { c2: c.c2 });
    }
    let gamma12_sq = raw.gamma12 * raw.gamma12;
    let product = raw.gamma11 * raw.gamma22;
    if gamma12_sq > product {
        warnings.push(ParamWarning::NotPositiveSemidefinite { gamma12_sq, product });
    }
    Ok(Validated { params: raw, warnings })
}

/// Working constants of the composite-mode generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedCoeffs {
    /// Linear gain, 2 r g².
    pub a: f64,
    /// Saturation, 4 g² A.
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta_bar: f64,
    /// Collective coupling √(g1² + g2²).
    pub g: f64,
}

impl DerivedCoeffs {
    /// B / A, taken as 0 when the pump is off.
    pub fn b_over_a(&self) -> f64 {
        if self.a > 0.0 {
            self.b / self.a
        } else {
            0.0
        }
    }

    pub fn detuning_factor(&self) -> f64 {
        1.0 + self.delta_bar * self.delta_bar
    }

    /// C̃1 = C1 (1 + δ̄²).
    pub fn c1_tilde(&self) -> f64 {
        self.c1 * self.detuning_factor()
    }

    /// Ã = A (1 + δ̄²).
    pub fn a_tilde(&self) -> f64 {
        self.a * self.detuning_factor()
    }

    /// A / C̃1; threshold sits at 1.
    pub fn pump_ratio(&self) -> f64 {
        self.a / self.c1_tilde()
    }

    /// Same coefficients with the saturation term switched off.
    pub fn without_saturation(mut self) -> Self {
        self.b = 0.0;
        self
    }
}

pub fn derive_coeffs(params: &LaserParams) -> DerivedCoeffs {
    let LaserParams { g1, g2, delta, gamma11, gamma22, gamma12, pump_rate } = *params;
    let g_sq = params.coupling_sq();
    let a = 2.0 * pump_rate * g_sq;
    let b = 4.0 * g_sq * a;
    let c1 = 2.0 / g_sq * (gamma11 * g1 * g1 + 2.0 * gamma12 * g1 * g2 + gamma22 * g2 * g2);
    let c2 = 2.0 / g_sq * (gamma11 * g2 * g2 - 2.0 * gamma12 * g1 * g2 + gamma22 * g1 * g1);
    let c3 = ((gamma11 - gamma22) * g1 * g2 + 2.0 * gamma12 * (g2 * g2 - g1 * g1)) / g_sq;
    DerivedCoeffs { a, b, c1, c2, c3, delta_bar: delta, g: g_sq.sqrt() }
}

/// Orthogonal map from bare modes (a1, a2) to composite modes (α, β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTransform {
    pub rows: [[f64; 2]; 2],
}

impl ModeTransform {
    /// O·Oᵀ, the identity for a valid transform.
    pub fn times_transpose(&self) -> [[f64; 2]; 2] {
        let o = &self.rows;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = o[i][0] * o[j][0] + o[i][1] * o[j][1];
            }
        }
        out
    }
}

pub fn composite_transform(params: &LaserParams) -> ModeTransform {
    let g = params.coupling_sq().sqrt();
    let (u, v) = (params.g1 / g, params.g2 / g);
    ModeTransform { rows: [[u, v], [v, -u]] }
}

/// Pump rate at which A = C̃1.
pub fn threshold_pump_rate(params: &LaserParams) -> f64 {
    let c = derive_coeffs(params);
    c.c1_tilde() / (2.0 * params.coupling_sq())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_coefficients() {
        let c = derive_coeffs(&LaserParams::reference());
        // g² = 0.0074; numerators worked out by hand.
        assert_relative_eq!(c.c1, 2.0 * (0.015 + 0.0385 + 0.0245) / 0.0074, max_relative = 1e-14);
        assert_eq!(format!("{:.4}", c.c1), "21.0811");
        assert_eq!(format!("{:.4}", c.c2), "0.9189");
        assert_eq!(format!("{:.4}", c.c3), "4.0405");
    }

    #[test]
    fn gain_and_saturation_at_pump_100() {
        let c = derive_coeffs(&LaserParams::reference().with_pump_rate(100.0));
        assert_relative_eq!(c.a, 1.48, max_relative = 1e-13);
        assert_relative_eq!(c.b, 0.043808, max_relative = 1e-13);
    }

    #[test]
    fn symmetric_case_reduces() {
        let p = LaserParams { g1: 0.1, g2: 0.1, delta: 0.0, gamma11: 3.0, gamma22: 3.0, gamma12: 0.0, pump_rate: 1.0 };
        let c = derive_coeffs(&p);
        assert_relative_eq!(c.c1, 6.0, max_relative = 1e-14);
        assert_relative_eq!(c.c2, 6.0, max_relative = 1e-14);
        assert_eq!(c.c3, 0.0);
        let p = p.with_gamma12(1.7);
        assert_eq!(derive_coeffs(&p).c3, 0.0);
    }

    #[test]
    fn transform_rows() {
        let t = composite_transform(&LaserParams::reference());
        assert_eq!(format!("{:.4} {:.4}", t.rows[0][0], t.rows[0][1]), "0.5812 0.8137");
        assert_eq!(format!("{:.4} {:.4}", t.rows[1][0], t.rows[1][1]), "0.8137 -0.5812");
        let p = LaserParams { g1: 0.3, g2: 0.3, ..LaserParams::reference() };
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t = composite_transform(&p);
        for (x, y) in t.rows.iter().flatten().zip([s, s, s, -s]) {
            assert_relative_eq!(*x, y, max_relative = 1e-15);
        }
    }

    #[test]
    fn threshold_reference_value() {
        let r = threshold_pump_rate(&LaserParams::reference());
        // C1 = 0.156 / 0.0074, (1 + δ²) = 10, 2g² = 0.0148
        assert_relative_eq!(r, 1.56 / 0.0074 / 0.0148, max_relative = 1e-14);
        assert_eq!(format!("{r:.3e}"), "1.424e4");
        let p = LaserParams { g1: 0.2, g2: 0.2, delta: 0.0, gamma11: 4.0, gamma22: 4.0, gamma12: 0.0, pump_rate: 0.0 };
        assert_relative_eq!(threshold_pump_rate(&p), 4.0 / 0.08, max_relative = 1e-14);
        let base = LaserParams::reference();
        assert!(threshold_pump_rate(&base.with_gamma12(4.0)) > threshold_pump_rate(&base.with_gamma12(0.0)));
    }

    #[test]
    fn validation() {
        let v = validate_params(LaserParams::reference()).unwrap();
        assert!(v.warnings.iter().any(|w| matches!(w, ParamWarning::NotPositiveSemidefinite { .. })));
        assert!(!v.warnings.iter().any(|w| matches!(w, ParamWarning::NonPositiveC2 { .. })));
        let v = validate_params(LaserParams::reference().with_gamma12(16.0)).unwrap();
        assert!(v.warnings.iter().any(|w| matches!(w, ParamWarning::NonPositiveC2 { c2 } if *c2 < 0.0)));
        let bad = LaserParams { g1: 0.0, ..LaserParams::reference() };
        assert!(matches!(validate_params(bad), Err(Error::InvalidParam { name: "g1", .. })));
        let bad = LaserParams::reference().with_pump_rate(-1.0);
        assert!(matches!(validate_params(bad), Err(Error::InvalidParam { name: "pump_rate", .. })));
        let bad = LaserParams { gamma22: f64::NAN, ..LaserParams::reference() };
        assert!(validate_params(bad).is_err());
    }

    #[test]
    fn pump_ratio_round_trip() {
        let p = LaserParams::reference().with_pump_ratio(2.0);
        assert_relative_eq!(derive_coeffs(&p).pump_ratio(), 2.0, max_relative = 1e-14);
    }
}
