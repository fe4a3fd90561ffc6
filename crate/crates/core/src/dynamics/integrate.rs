// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) integration of linear generators.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use super::generator::{GeneratorCoherence, GeneratorDiag};
use crate::error::{Error, Result};
use crate::fock::{DiagonalState, FockGrid};

/// Element type of a state vector.
pub trait Scalar: Copy + Add<Output = Self> + Mul<f64, Output = Self> + Default + Send + Sync {
    fn magnitude(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// A linear map dρ/dt = G ρ on a Fock grid.
pub trait LinearSystem {
    type Elem: Scalar;
    fn grid(&self) -> FockGrid;
    fn apply(&self, x: &[Self::Elem], out: &mut [Self::Elem]);
    /// Largest diagonal rate, used for the first step-size guess.
    fn rate_scale(&self) -> f64;
    /// Whether Σ entries must be conserved.
    fn conserves_trace(&self) -> bool;
}

impl LinearSystem for GeneratorDiag {
    type Elem = f64;
    fn grid(&self) -> FockGrid {
        self.grid
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        GeneratorDiag::apply(self, x, out)
    }
    fn rate_scale(&self) -> f64 {
        self.max_rate()
    }
    fn conserves_trace(&self) -> bool {
        self.boundary == super::Boundary::Reflecting
    }
}

impl LinearSystem for GeneratorCoherence {
    type Elem = Complex64;
    fn grid(&self) -> FockGrid {
        self.grid
    }
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        GeneratorCoherence::apply(self, x, out)
    }
    fn rate_scale(&self) -> f64 {
        self.max_rate()
    }
    fn conserves_trace(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateControls {
    pub rtol: f64,
    pub atol: f64,
    /// Spacing of recorded samples; `None` records only the endpoints.
    pub sample_interval: Option<f64>,
    /// Abort when |Σρ(t) − Σρ(0)| exceeds this (trace-conserving systems only).
    pub trace_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegrateControls {
    fn default() -> Self {
        IntegrateControls { rtol: 1e-8, atol: 1e-12, sample_interval: None, trace_tol: 1e-9, max_steps: 50_000_000 }
    }
}

/// Sampled observables of a run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Σ of all entries: the trace for the diagonal sector, S(t) for a block.
    pub sum: Vec<Complex64>,
    /// Σ nα·ρ (real part).
    pub nbar_alpha: Vec<f64>,
    /// Σ nβ·ρ (real part).
    pub nbar_beta: Vec<f64>,
    /// Largest |Σρ(t) − Σρ(0)| seen on any accepted step.
    pub max_trace_drift: f64,
    pub steps: usize,
}

impl Trajectory {
    fn record<T: Scalar>(&mut self, grid: &FockGrid, t: f64, y: &[T]) {
        let mut s = Complex64::new(0.0, 0.0);
        let (mut na, mut nb) = (0.0, 0.0);
        for (i, v) in y.iter().enumerate() {
            let z = v.to_complex();
            let (a, b) = grid.coords(i);
            s += z;
            na += a as f64 * z.re;
            nb += b as f64 * z.re;
        }
        self.times.push(t);
        self.sum.push(s);
        self.nbar_alpha.push(na);
        self.nbar_beta.push(nb);
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive stepper that keeps its step size between calls.
pub(crate) struct Stepper<'a, S: LinearSystem> {
    sys: &'a S,
    controls: IntegrateControls,
    pub t: f64,
    pub y: Vec<S::Elem>,
    h: f64,
    k: Vec<Vec<S::Elem>>,
    stage: Vec<S::Elem>,
    initial_trace: Complex64,
    pub max_drift: f64,
    pub steps: usize,
}

impl<'a, S: LinearSystem> Stepper<'a, S> {
    pub fn new(sys: &'a S, y0: Vec<S::Elem>, controls: IntegrateControls) -> Self {
        let n = y0.len();
        let initial_trace = y0.iter().fold(Complex64::new(0.0, 0.0), |s, v| s + v.to_complex());
        let mut k = vec![vec![S::Elem::default(); n]; 7];
        sys.apply(&y0, &mut k[0]);
        let h = 0.5 / sys.rate_scale().max(1e-12);
        Stepper { sys, controls, t: 0.0, y: y0, h, k, stage: vec![S::Elem::default(); n], initial_trace, max_drift: 0.0, steps: 0 }
    }

    /// Current derivative G·y (first stage of the next step).
    pub fn derivative(&self) -> &[S::Elem] {
        &self.k[0]
    }

    /// Advances exactly to `t_target`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            if self.steps >= self.controls.max_steps {
                return Err(Error::StepUnderflow { t: self.t, h: self.h });
            }
            let remaining = t_target - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            let err = self.try_step(h);
            if err <= 1.0 {
                self.accept(h, last, t_target)?;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && err <= 1.0) {
                self.h = h * factor;
            } else {
                self.h = self.h.max(h * factor);
            }
            if self.h < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t, h: self.h });
            }
        }
        Ok(())
    }

    #[allow(clippy::needless_range_loop)]
    fn try_step(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut v = self.y[i];
                for (j, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        v = v + self.k[j][i] * (h * a);
                    }
                }
                self.stage[i] = v;
            }
            self.sys.apply(&self.stage, &mut self.k[s]);
        }
        // stage now holds the 5th-order solution (FSAL row); k[6] its derivative
        let mut acc = 0.0;
        for i in 0..n {
            let mut e = S::Elem::default();
            for (j, ej) in E.iter().enumerate() {
                if *ej != 0.0 {
                    e = e + self.k[j][i] * (h * ej);
                }
            }
            let scale = self.controls.atol + self.controls.rtol * self.y[i].magnitude().max(self.stage[i].magnitude());
            let r = e.magnitude() / scale;
            acc += r * r;
        }
        (acc / n as f64).sqrt()
    }

    fn accept(&mut self, h: f64, last: bool, t_target: f64) -> Result<()> {
        std::mem::swap(&mut self.y, &mut self.stage);
        self.k.swap(0, 6);
        self.t = if last { t_target } else { self.t + h };
        self.steps += 1;
        if self.sys.conserves_trace() {
            let tr = self.y.iter().fold(Complex64::new(0.0, 0.0), |s, v| s + v.to_complex());
            let drift = (tr - self.initial_trace).norm();
            self.max_drift = self.max_drift.max(drift);
            if drift > self.controls.trace_tol {
                return Err(Error::TraceDrift { t: self.t, drift, tol: self.controls.trace_tol });
            }
        }
        Ok(())
    }
}

/// Integrates from t = 0 to `t_end`, recording samples on the requested cadence.
pub fn integrate<S: LinearSystem>(
    sys: &S,
    y0: Vec<S::Elem>,
    t_end: f64,
    controls: &IntegrateControls,
) -> Result<(Trajectory, Vec<S::Elem>)> {
    let grid = sys.grid();
    let mut traj = Trajectory::default();
    traj.record(&grid, 0.0, &y0);
    let mut stepper = Stepper::new(sys, y0, *controls);
    let mut k = 1usize;
    loop {
        let next = match controls.sample_interval {
            Some(dt) => (k as f64 * dt).min(t_end),
            None => t_end,
        };
        stepper.advance_to(next)?;
        traj.record(&grid, stepper.t, &stepper.y);
        if next >= t_end {
            break;
        }
        k += 1;
    }
    traj.max_trace_drift = stepper.max_drift;
    traj.steps = stepper.steps;
    Ok((traj, stepper.y))
}

/// Relative stationarity residual ‖Gρ‖₁/‖ρ‖₁.
pub fn steady_residual(gen: &GeneratorDiag, values: &[f64]) -> f64 {
    let mut out = vec![0.0; values.len()];
    gen.apply(values, &mut out);
    out.iter().map(|v| v.abs()).sum::<f64>() / values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Runs the diagonal sector from vacuum until ‖Gρ‖₁ < 1e-10‖ρ‖₁.
pub fn steady_by_integration(gen: &GeneratorDiag) -> Result<DiagonalState> {
    let c = &gen.coeffs;
    let slowest = [c.c1, c.c2, 1.0].into_iter().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
    let t_max = 1e6 / slowest;
    let start = DiagonalState::new_vacuum(gen.grid);
    // Explicit steps sit on the stability boundary once transients die out,
    // leaving a residual floor near rtol; the tight tolerances keep it below target.
    let controls = IntegrateControls { rtol: 1e-12, atol: 1e-16, ..Default::default() };
    let mut stepper = Stepper::new(gen, start.values, controls);
    let mut t_next = 1.0 / slowest;
    let mut residual = f64::INFINITY;
    while stepper.t < t_max {
        stepper.advance_to(t_next.min(t_max))?;
        let norm: f64 = stepper.y.iter().map(|v| v.abs()).sum();
        residual = stepper.derivative().iter().map(|v| v.abs()).sum::<f64>() / norm;
        if residual < 1e-10 {
            let mut state = DiagonalState::from_values(gen.grid, stepper.y)?;
            state.normalize();
            return Ok(state);
        }
        t_next = stepper.t + (stepper.t * 0.25).max(1.0 / slowest);
    }
    Err(Error::SteadyNotReached { t_max, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_diag_generator;
    use crate::params::{derive_coeffs, LaserParams};

    #[test]
    fn single_photon_decays_exponentially() {
        let p = LaserParams { g1: 0.1, g2: 0.1, delta: 0.0, gamma11: 2.0, gamma22: 2.0, gamma12: 0.5, pump_rate: 0.0 };
        let c = derive_coeffs(&p);
        assert_eq!(c.c3, 0.0);
        let grid = FockGrid::new(3, 1).unwrap();
        let g = build_diag_generator(grid, &c).unwrap();
        let mut y = vec![0.0; grid.len()];
        y[grid.index(1, 0)] = 1.0;
        let controls = IntegrateControls { sample_interval: Some(0.05), ..Default::default() };
        let (traj, _) = integrate(&g, y, 1.0, &controls).unwrap();
        for (t, n) in traj.times.iter().zip(&traj.nbar_alpha) {
            assert!((n - (-c.c1 * t).exp()).abs() < 1e-6, "t = {t}");
        }
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_generator_leaves_state() {
        let p = LaserParams { g1: 0.1, g2: 0.1, delta: 0.0, gamma11: 2.0, gamma22: 2.0, gamma12: 0.5, pump_rate: 0.0 };
        let c = derive_coeffs(&p);
        let grid = FockGrid::new(3, 2).unwrap();
        let g = build_diag_generator(grid, &c).unwrap();
        let y = DiagonalState::new_vacuum(grid).values;
        let (_, out) = integrate(&g, y.clone(), 10.0, &IntegrateControls::default()).unwrap();
        assert_eq!(out, y);
    }
}
