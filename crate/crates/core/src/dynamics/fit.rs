// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{PI, TAU};

use super::integrate::Trajectory;
use crate::error::{Error, Result};

/// Decay of a summed block amplitude S(t) ∝ exp(−rate·t + i·frequency·t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub frequency: f64,
    pub points: usize,
}

fn slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        sxy += (a - mt) * (b - my);
        sxx += (a - mt) * (a - mt);
    }
    sxy / sxx
}

/// Least-squares decay rate and oscillation frequency of S(t) over the window
/// |S| ∈ [1e-3, 0.5]·|S(0)|. A block that does not decay at all yields rate 0.
pub fn fit_decay(traj: &Trajectory) -> Result<DecayFit> {
    let s0 = traj.sum.first().map(|s| s.norm()).unwrap_or(0.0);
    if traj.times.len() < 3 || s0 == 0.0 {
        return Err(Error::EmptyFitWindow { points: traj.times.len() });
    }
    let mut phase = Vec::with_capacity(traj.sum.len());
    let mut prev = traj.sum[0].arg();
    let mut offset = 0.0;
    for s in &traj.sum {
        let p = s.arg();
        let jump = p - prev;
        if jump > PI {
            offset -= TAU;
        } else if jump < -PI {
            offset += TAU;
        }
        prev = p;
        phase.push(p + offset);
    }
    if traj.sum.iter().all(|s| (s.norm() - s0).abs() <= 1e-9 * s0) {
        return Ok(DecayFit { rate: 0.0, frequency: slope(&traj.times, &phase), points: traj.times.len() });
    }
    let (mut t, mut logs, mut ph) = (Vec::new(), Vec::new(), Vec::new());
    for (i, s) in traj.sum.iter().enumerate() {
        let r = s.norm() / s0;
        if (1e-3..=0.5).contains(&r) {
            t.push(traj.times[i]);
            logs.push(r.ln());
            ph.push(phase[i]);
        }
    }
    if t.len() < 3 {
        return Err(Error::EmptyFitWindow { points: t.len() });
    }
    Ok(DecayFit { rate: -slope(&t, &logs), frequency: slope(&t, &ph), points: t.len() })
}
