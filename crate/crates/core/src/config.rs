// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` scenario files. Every rate is in units of the atomic
//! decay rate. Unspecified laser parameters fall back to the reference set.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fock::FockGrid;
use crate::params::LaserParams;
use crate::steady::{BetaPolicy, SolveControls};

pub const KNOWN_KEYS: [&str; 17] = [
    "g1",
    "g2",
    "delta",
    "gamma11",
    "gamma22",
    "gamma12",
    "pump_rate",
    "pump_ratio",
    "n_max_alpha",
    "n_max_beta",
    "tol_steady",
    "max_iter",
    "rtol_integrate",
    "out_dir",
    "t_end",
    "sample_interval",
    "beta_policy",
];

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
pub struct ScenarioConfig {
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub delta: Option<f64>,
    pub gamma11: Option<f64>,
    pub gamma22: Option<f64>,
    pub gamma12: Option<f64>,
    pub pump_rate: Option<f64>,
    pub pump_ratio: Option<f64>,
    pub n_max_alpha: Option<usize>,
    pub n_max_beta: Option<usize>,
    pub tol_steady: Option<f64>,
    pub max_iter: Option<usize>,
    pub rtol_integrate: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub t_end: Option<f64>,
    pub sample_interval: Option<f64>,
    /// `recurrence`, `vacuum` or `fallback`.
    pub beta_policy: Option<String>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        for key in table.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
        }
        let cfg: ScenarioConfig =
            table.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::parse(&text)?;
        if cfg.pump_rate.is_none() && cfg.pump_ratio.is_none() {
            return Err(Error::Config("exactly one of `pump_rate` and `pump_ratio` is required".into()));
        }
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.pump_rate.is_some() && self.pump_ratio.is_some() {
            return Err(Error::Config("give either `pump_rate` or `pump_ratio`, not both".into()));
        }
        for (name, v) in [("tol_steady", self.tol_steady), ("rtol_integrate", self.rtol_integrate)] {
            if let Some(v) = v {
                if v.is_nan() || v <= 0.0 {
                    return Err(Error::Config(format!("`{name}` must be positive")));
                }
            }
        }
        for (name, v) in [("t_end", self.t_end), ("sample_interval", self.sample_interval)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("`{name}` must be positive")));
                }
            }
        }
        if self.max_iter == Some(0) {
            return Err(Error::Config("`max_iter` must be at least 1".into()));
        }
        if let Some(p) = &self.beta_policy {
            parse_beta_policy(p)?;
        }
        Ok(())
    }

    /// Laser parameters with the pump resolved to an absolute rate. Without
    /// any pump key the reference pump ratio of 2 is used.
    pub fn params(&self) -> LaserParams {
        let r = LaserParams::reference();
        let p = LaserParams {
            g1: self.g1.unwrap_or(r.g1),
            g2: self.g2.unwrap_or(r.g2),
            delta: self.delta.unwrap_or(r.delta),
            gamma11: self.gamma11.unwrap_or(r.gamma11),
            gamma22: self.gamma22.unwrap_or(r.gamma22),
            gamma12: self.gamma12.unwrap_or(r.gamma12),
            pump_rate: 0.0,
        };
        match (self.pump_rate, self.pump_ratio) {
            (Some(rate), _) => p.with_pump_rate(rate),
            (None, Some(ratio)) => p.with_pump_ratio(ratio),
            (None, None) => p.with_pump_ratio(2.0),
        }
    }

    /// Grid override, if both cutoffs are given or one is given alongside defaults.
    pub fn grid(&self, fallback: FockGrid) -> Result<Option<FockGrid>> {
        if self.n_max_alpha.is_none() && self.n_max_beta.is_none() {
            return Ok(None);
        }
        FockGrid::new(
            self.n_max_alpha.unwrap_or(fallback.n_max_alpha),
            self.n_max_beta.unwrap_or(fallback.n_max_beta),
        )
        .map(Some)
    }

    pub fn solve_controls(&self) -> SolveControls {
        let d = SolveControls::default();
        SolveControls {
            tol: self.tol_steady.unwrap_or(d.tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            beta: self.beta_policy.as_deref().map(|p| parse_beta_policy(p).expect("checked on parse")).unwrap_or(d.beta),
            ..d
        }
    }
}

pub fn parse_beta_policy(text: &str) -> Result<BetaPolicy> {
    match text {
        "recurrence" => Ok(BetaPolicy::Recurrence),
        "vacuum" => Ok(BetaPolicy::Vacuum),
        "fallback" => Ok(BetaPolicy::RecurrenceOrVacuum),
        other => Err(Error::Config(format!("unknown beta_policy `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::threshold_pump_rate;

    #[test]
    fn misspelt_key_is_rejected() {
        let err = ScenarioConfig::parse("gamma21 = 3.0\npump_ratio = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn pump_keys_are_exclusive() {
        assert!(ScenarioConfig::parse("pump_rate = 1.0\npump_ratio = 2.0").is_err());
        let cfg = ScenarioConfig::parse("pump_ratio = 0.5\ngamma12 = 4.0").unwrap();
        let p = cfg.params();
        assert!((p.pump_rate / threshold_pump_rate(&p) - 0.5).abs() < 1e-12);
        assert_eq!(p.gamma12, 4.0);
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(ScenarioConfig::parse("pump_rate = 1.0\ntol_steady = 0.0").is_err());
        assert!(ScenarioConfig::parse("pump_rate = 1.0\nbeta_policy = \"maybe\"").is_err());
        let cfg = ScenarioConfig::parse("pump_rate = 1.0\ntol_steady = 1e-6\nbeta_policy = \"fallback\"").unwrap();
        assert_eq!(cfg.solve_controls().tol, 1e-6);
        assert_eq!(cfg.solve_controls().beta, BetaPolicy::RecurrenceOrVacuum);
    }

    #[test]
    fn grid_override() {
        let base = FockGrid::new(10, 5).unwrap();
        let cfg = ScenarioConfig::parse("pump_rate = 0\nn_max_alpha = 40").unwrap();
        assert_eq!(cfg.grid(base).unwrap(), Some(FockGrid::new(40, 5).unwrap()));
        assert_eq!(ScenarioConfig::default().grid(base).unwrap(), None);
    }
}
