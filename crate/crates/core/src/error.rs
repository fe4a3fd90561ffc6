// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;

/// Which composite mode a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Alpha,
    Beta,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Alpha => f.write_str("alpha"),
            Mode::Beta => f.write_str("beta"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("state trace {trace} deviates from 1 by more than {tol:e}")]
    TraceMismatch { trace: f64, tol: f64 },

    #[error("degenerate regime: M({n_alpha}, {n_beta}) = {value:e} is not positive")]
    DegenerateM { n_alpha: f64, n_beta: f64, value: f64 },

    #[error("non-positive alpha recurrence denominator {value:e} at n_alpha = {n}")]
    AlphaDenominator { n: usize, value: f64 },

    #[error("unphysical damping: beta recurrence denominator {value:e} at n_beta = {n}")]
    UnphysicalDamping { n: usize, value: f64 },

    #[error("non-normalizable beta distribution: ratio {ratio} >= 1 at n_beta = {n}")]
    NonNormalizable { n: usize, ratio: f64 },

    #[error("grid too small: {mode} tail mass {tail:e} at n_max = {n_max}")]
    GridTooSmall { mode: Mode, n_max: usize, tail: f64 },

    #[error("fixed point not reached after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("kick would overflow the grid: top alpha level holds {mass:e}")]
    GridOverflow { mass: f64 },

    #[error("quadrature not converged: relative change {change:e} at the finest rule")]
    Quadrature { change: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("trace drift {drift:e} at t = {t} exceeds {tol:e}")]
    TraceDrift { t: f64, drift: f64, tol: f64 },

    #[error("steady state not reached by t = {t_max:e} (residual {residual:e})")]
    SteadyNotReached { t_max: f64, residual: f64 },

    #[error("degenerate steady state: {0}")]
    DegenerateSteadyState(String),

    #[error("grid of {size} states exceeds the direct-solver limit {limit}")]
    GridTooLarge { size: usize, limit: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("undefined for zero mean photon number")]
    ZeroMean,

    #[error("decay fit window is empty or too short ({points} points)")]
    EmptyFitWindow { points: usize },

    #[error("invalid coherence offsets ({k1}, {k2})")]
    InvalidOffset { k1: i64, k2: i64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParam { .. } => "invalid_param",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::TraceMismatch { .. } => "trace_mismatch",
            Error::DegenerateM { .. } => "degenerate_m",
            Error::AlphaDenominator { .. } => "alpha_denominator",
            Error::UnphysicalDamping { .. } => "unphysical_damping",
            Error::NonNormalizable { .. } => "non_normalizable",
            Error::GridTooSmall { .. } => "grid_too_small",
            Error::NoConvergence { .. } => "no_convergence",
            Error::GridOverflow { .. } => "grid_overflow",
            Error::Quadrature { .. } => "quadrature",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::TraceDrift { .. } => "trace_drift",
            Error::SteadyNotReached { .. } => "steady_not_reached",
            Error::DegenerateSteadyState(_) => "degenerate_steady_state",
            Error::GridTooLarge { .. } => "grid_too_large",
            Error::NotApplicable(_) => "not_applicable",
            Error::ZeroMean => "zero_mean",
            Error::EmptyFitWindow { .. } => "empty_fit_window",
            Error::InvalidOffset { .. } => "invalid_offset",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
