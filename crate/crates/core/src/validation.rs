// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance scenarios. Each criterion runs its scenario, records the measured
//! quantities with their bounds, and reports a verdict. Informational checks
//! are printed but do not gate.

use std::io::Write;
use std::time::Instant;

use crate::dynamics::{
    build_diag_generator, integrate, steady_by_integration, steady_residual, IntegrateControls,
};
use crate::error::Result;
use crate::fock::{DiagonalState, FockGrid, PhotonDistribution};
use crate::observables::{
    analytic_weak_pump, g2_zero, linewidth, linewidth_limit, mandel_q, measure_linewidth, petermann,
    petermann_default_pump, threshold_curve, ObservableReport, PetermannMode,
};
use crate::output::{fmt_real, write_distribution_csv, write_report_csv};
use crate::params::{derive_coeffs, threshold_pump_rate, LaserParams};
use crate::steady::{liouvillian_steady_oracle, solve_steady, BetaPolicy, SolveControls};
use crate::superop::GainKernel;
use crate::Mode;

#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub bound: String,
    pub passed: bool,
    /// Informational checks are reported but never fail a criterion.
    pub gating: bool,
}

impl Check {
    fn new(label: &str, measured: f64, bound: String, passed: bool) -> Self {
        Check { label: label.to_string(), measured, bound, passed, gating: true }
    }

    pub fn rel(label: &str, measured: f64, target: f64, tol: f64) -> Self {
        let err = (measured / target - 1.0).abs();
        Check::new(label, measured, format!("|x/{target:.6e} - 1| <= {tol:e}"), err <= tol)
    }

    pub fn at_most(label: &str, measured: f64, bound: f64) -> Self {
        Check::new(label, measured, format!("<= {bound:e}"), measured <= bound)
    }

    pub fn at_least(label: &str, measured: f64, bound: f64) -> Self {
        Check::new(label, measured, format!(">= {bound:e}"), measured >= bound)
    }

    pub fn in_range(label: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Check::new(label, measured, format!("in [{lo}, {hi}]"), (lo..=hi).contains(&measured))
    }

    pub fn flag(label: &str, ok: bool) -> Self {
        Check::new(label, if ok { 1.0 } else { 0.0 }, "true".into(), ok)
    }

    fn informational(mut self) -> Self {
        self.gating = false;
        self
    }

    fn failure(label: &str, err: &crate::Error) -> Self {
        Check::new(label, f64::NAN, format!("error {}: {err}", err.kind()), false)
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.seconds <= self.budget_seconds && self.checks.iter().all(|c| c.passed || !c.gating)
    }

    pub fn check(&self, label: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.label == label)
    }
}

pub const CRITERIA: [(u8, &str, f64); 10] = [
    (1, "thermal limit below threshold", 1.0),
    (2, "mean occupation above threshold", 5.0),
    (3, "photon-number fluctuations", 30.0),
    (4, "beta-mode suppression", 5.0),
    (5, "null-space oracle equivalence", 60.0),
    (6, "gain kernel derivation chain", 10.0),
    (7, "linewidth and frequency shift", 120.0),
    (8, "Petermann factor", 60.0),
    (9, "threshold curve", 1.0),
    (10, "structural invariants", 30.0),
];

/// Reference laser parameters, unpumped.
pub fn reference_params() -> LaserParams {
    LaserParams::reference()
}

/// Pump ratio of the small oracle scenario, chosen for n̄α ≈ 5.
pub const ORACLE_PUMP_RATIO: f64 = 0.85;
pub const ORACLE_GRID: (usize, usize) = (60, 15);

/// Resonant, weaker-coupled variant of the reference parameters used for the
/// linewidth rate check (see `criterion_7`).
pub fn resonant_linewidth_params() -> LaserParams {
    let base = LaserParams::reference();
    let scale = 0.03 / base.coupling_sq().sqrt();
    LaserParams { g1: base.g1 * scale, g2: base.g2 * scale, delta: 0.0, ..base }.with_pump_ratio(1.25)
}

/// Regime where the closed-form Petermann factor applies: B/A = 8e-4, δ = 0.
pub fn asymptotic_petermann_params(gamma12: f64) -> (LaserParams, f64) {
    let p = LaserParams { g1: 0.01, g2: 0.01, delta: 0.0, gamma11: 6.0, gamma22: 6.0, gamma12, pump_rate: 0.0 };
    let pump = 50.0 * threshold_pump_rate(&p.with_gamma12(4.0));
    (p, pump)
}

/// Symmetric parameters with no cross-damping term.
pub fn symmetric_params() -> LaserParams {
    let g = (LaserParams::reference().coupling_sq() / 2.0).sqrt();
    LaserParams { g1: g, g2: g, delta: 3.0, gamma11: 5.5, gamma22: 5.5, gamma12: 2.0, pump_rate: 0.0 }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp()).collect()
}

fn common_tv(p: &PhotonDistribution, q: &PhotonDistribution) -> f64 {
    let n = p.probs.len().max(q.probs.len());
    (0..n).map(|i| (p.probs.get(i).unwrap_or(&0.0) - q.probs.get(i).unwrap_or(&0.0)).abs()).sum::<f64>() / 2.0
}

fn criterion_1(out: &mut Vec<Check>) -> Result<()> {
    let params = reference_params().with_pump_ratio(0.5);
    let controls = SolveControls::default();
    let bare = derive_coeffs(&params).without_saturation();
    let sol = solve_steady(&bare, &controls)?;
    let law = analytic_weak_pump(&bare, sol.p_alpha.n_max())?;
    out.push(Check::at_most("tv_geometric_b0", sol.p_alpha.total_variation(&law), 1e-3));
    let full = derive_coeffs(&params);
    let sol = solve_steady(&full, &controls)?;
    let law = analytic_weak_pump(&full, sol.p_alpha.n_max())?;
    out.push(Check::at_most("tv_geometric_physical_b", sol.p_alpha.total_variation(&law), 0.05));
    // Without the cross-damping term the printed recurrence is exactly geometric.
    let sym = derive_coeffs(&symmetric_params().with_pump_ratio(0.5)).without_saturation();
    let sol = solve_steady(&sym, &controls)?;
    let law = analytic_weak_pump(&sym, sol.p_alpha.n_max())?;
    out.push(Check::at_most("tv_geometric_no_cross_term", sol.p_alpha.total_variation(&law), 1e-3).informational());
    Ok(())
}

fn criterion_2(out: &mut Vec<Check>) -> Result<()> {
    let params = reference_params().with_pump_ratio(2.0);
    let sol = solve_steady(&derive_coeffs(&params), &SolveControls::default())?;
    let g2 = params.coupling_sq();
    let expected = (1.0 + params.delta * params.delta) / (4.0 * g2);
    out.push(Check::rel("nbar_alpha", sol.nbar_alpha, expected, 0.02));
    Ok(())
}

/// g²(0) across a 20-point log sweep of A/C̃1 ∈ [0.5, 10].
pub fn g2_sweep(params: &LaserParams, beta: BetaPolicy) -> Result<Vec<f64>> {
    let controls = SolveControls { beta, ..Default::default() };
    log_space(0.5, 10.0, 20)
        .into_iter()
        .map(|x| {
            let sol = solve_steady(&derive_coeffs(&params.with_pump_ratio(x)), &controls)?;
            g2_zero(&sol.p_alpha)
        })
        .collect()
}

fn criterion_3(out: &mut Vec<Check>) -> Result<()> {
    let params = reference_params().with_pump_ratio(0.5);
    let c = derive_coeffs(&params);
    let sol = solve_steady(&c, &SolveControls::default())?;
    let target = c.a / (c.c1_tilde() - c.a);
    out.push(Check::rel("mandel_q_half_threshold", mandel_q(&sol.p_alpha)?, target, 0.05));
    for (g12, gating) in [(0.0, true), (4.0, true), (5.5, false), (8.0, false), (16.0, false)] {
        let p = reference_params().with_gamma12(g12);
        let beta = if gating { BetaPolicy::Recurrence } else { BetaPolicy::Vacuum };
        let curve = g2_sweep(&p, beta)?;
        let tag = |s: &str| format!("{s}_gamma12_{g12}");
        let mono = curve.windows(2).all(|w| w[1] <= w[0]);
        let mut checks = vec![
            Check::in_range(&tag("g2_below"), curve[0], 1.9, 2.0),
            Check::in_range(&tag("g2_above"), curve[19], 1.0, 1.1),
            Check::flag(&tag("g2_monotone"), mono),
        ];
        if !gating {
            checks = checks.into_iter().map(Check::informational).collect();
        }
        out.extend(checks);
    }
    Ok(())
}

fn criterion_4(out: &mut Vec<Check>) -> Result<()> {
    let params = reference_params().with_pump_ratio(2.0);
    let sol = solve_steady(&derive_coeffs(&params), &SolveControls::default())?;
    out.push(Check::at_most("nbar_ratio", sol.nbar_beta / sol.nbar_alpha, 1e-2));
    let sym = derive_coeffs(&symmetric_params().with_pump_ratio(2.0));
    let sol = solve_steady(&sym, &SolveControls::default())?;
    out.push(Check::flag("vacuum_beta_without_cross_term", sym.c3 == 0.0 && sol.p_beta.probs[0] == 1.0));
    Ok(())
}

/// The null-space, time-integrated and recurrence solutions of the oracle scenario.
pub struct OracleScenario {
    pub null_space: DiagonalState,
    pub integrated: DiagonalState,
    pub recurrence_alpha: PhotonDistribution,
    pub nbar_alpha: f64,
}

pub fn oracle_scenario() -> Result<OracleScenario> {
    let c = derive_coeffs(&reference_params().with_pump_ratio(ORACLE_PUMP_RATIO));
    let grid = FockGrid::new(ORACLE_GRID.0, ORACLE_GRID.1)?;
    let gen = build_diag_generator(grid, &c)?;
    let null_space = liouvillian_steady_oracle(&gen)?;
    let integrated = steady_by_integration(&gen)?;
    let sol = solve_steady(&c, &SolveControls::default())?;
    Ok(OracleScenario { null_space, integrated, recurrence_alpha: sol.p_alpha, nbar_alpha: sol.nbar_alpha })
}

fn criterion_5(out: &mut Vec<Check>) -> Result<()> {
    let s = oracle_scenario()?;
    out.push(Check::in_range("nbar_alpha", s.nbar_alpha, 3.0, 7.0));
    let marginal = s.null_space.marginal(Mode::Alpha)?;
    out.push(Check::at_most("tv_null_space_vs_recurrence", common_tv(&marginal, &s.recurrence_alpha), 0.05));
    let diff = s.null_space.values.iter().zip(&s.integrated.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.push(Check::at_most("max_abs_integrated_vs_null_space", diff, 1e-6));
    Ok(())
}

fn criterion_6(out: &mut Vec<Check>) -> Result<()> {
    let mut worst: f64 = 0.0;
    for delta in [0.0, 3.0] {
        let c = derive_coeffs(&reference_params().with_delta(delta).with_pump_ratio(2.0));
        for offset in 0..=10 {
            let closed = GainKernel::closed_form(&c, 10, offset);
            let quad = GainKernel::quadrature(&c, 10, offset)?;
            for n in 0..=(10 - offset as usize) {
                let m = n + offset as usize;
                let (s1, f1) = closed.coefficient(n, m).expect("tabulated");
                let (s2, f2) = quad.coefficient(n, m).expect("tabulated");
                worst = worst.max((s1 - s2).norm() / s1.norm());
                if f1 != 0.0 {
                    worst = worst.max((f1 - f2).abs() / f1.abs());
                }
            }
        }
    }
    out.push(Check::at_most("max_rel_kernel_mismatch", worst, 1e-6));
    let p = reference_params().with_delta(0.0).with_pump_rate(5000.0);
    let c = derive_coeffs(&p);
    let quad = GainKernel::quadrature(&c, 2, 0)?;
    let rate = -quad.self_coeff[0].re;
    let g2 = p.coupling_sq();
    out.push(Check::rel("vacuum_gain_rate", rate, p.pump_rate * 2.0 * g2 / (1.0 + 4.0 * g2), 1e-8));
    Ok(())
}

fn criterion_7(out: &mut Vec<Check>) -> Result<()> {
    let controls = SolveControls::default();
    let p = resonant_linewidth_params();
    let c = derive_coeffs(&p);
    let m = measure_linewidth(&c, &solve_steady(&c, &controls)?)?;
    out.push(Check::rel("fwhm_resonant", m.fwhm, m.predicted_linewidth, 0.1));

    let p = reference_params().with_pump_ratio(2.0);
    let c = derive_coeffs(&p);
    let m = measure_linewidth(&c, &solve_steady(&c, &controls)?)?;
    out.push(Check::rel("shift_reference", m.shift, m.predicted_shift, 0.1));
    out.push(Check::rel("fwhm_reference", m.fwhm, m.predicted_linewidth, 0.1).informational());

    let lim = derive_coeffs(&reference_params().with_delta(0.0).with_pump_ratio(2.0)).without_saturation();
    let n = 1e12;
    out.push(Check::rel("limit_form", linewidth(&lim, n), linewidth_limit(&lim, n), 1e-10));
    Ok(())
}

fn criterion_8(out: &mut Vec<Check>) -> Result<()> {
    let base = reference_params();
    let closed = base.with_gamma12(0.0);
    let k0 = petermann(&closed, petermann_default_pump(&closed), PetermannMode::Numeric)?;
    out.push(Check::flag("k_closed_is_one", k0 == 1.0));
    let mut ks = Vec::new();
    for g12 in [0.0, 2.0, 4.0, 8.0, 16.0] {
        let p = base.with_gamma12(g12);
        ks.push(petermann(&p, petermann_default_pump(&p), PetermannMode::Numeric)?);
    }
    for (g12, k) in [2.0, 4.0, 8.0, 16.0].iter().zip(&ks[1..]) {
        out.push(Check::at_least(&format!("k_gamma12_{g12}"), *k, 1.0).informational());
    }
    out.push(Check::flag("k_strictly_increasing", ks.windows(2).all(|w| w[1] > w[0])));
    for g12 in [2.0, 4.0] {
        let (p, pump) = asymptotic_petermann_params(g12);
        let numeric = petermann(&p, pump, PetermannMode::Numeric)?;
        let closed_form = petermann(&p, pump, PetermannMode::Asymptotic)?;
        out.push(Check::rel(&format!("k_numeric_vs_closed_form_{g12}"), numeric, closed_form, 0.05));
    }
    Ok(())
}

fn criterion_9(out: &mut Vec<Check>) -> Result<()> {
    let grid: Vec<f64> = (0..=16).map(f64::from).collect();
    let curve = threshold_curve(&reference_params(), &grid);
    let slopes: Vec<f64> = curve.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let spread = slopes.iter().map(|s| (s / slopes[0] - 1.0).abs()).fold(0.0, f64::max);
    out.push(Check::at_most("affine_slope_spread", spread, 1e-10));
    out.push(Check::flag("strictly_increasing", slopes.iter().all(|s| *s > 0.0)));
    let r = threshold_pump_rate(&reference_params());
    out.push(Check::flag("four_significant_figures", format!("{r:.3e}") == format!("{:.3e}", 14243.96)));
    out.push(Check::rel("r_th", r, 14243.96, 5e-5));
    Ok(())
}

fn csv_bytes(params: &LaserParams) -> Result<Vec<u8>> {
    let (report, sol) = ObservableReport::compute(params, None, &SolveControls::default())?;
    let mut buf = Vec::new();
    write_report_csv(&mut buf, &report)?;
    write_distribution_csv(&mut buf, &sol.p_alpha)?;
    write_distribution_csv(&mut buf, &sol.p_beta)?;
    Ok(buf)
}

fn criterion_10(out: &mut Vec<Check>) -> Result<()> {
    let c = derive_coeffs(&reference_params().with_pump_ratio(ORACLE_PUMP_RATIO));
    let grid = FockGrid::new(ORACLE_GRID.0, ORACLE_GRID.1)?;
    let gen = build_diag_generator(grid, &c)?;
    let controls = IntegrateControls { sample_interval: Some(0.5), ..Default::default() };
    let (traj, end) = integrate(&gen, DiagonalState::new_vacuum(grid).values, 20.0, &controls)?;
    out.push(Check::at_most("trace_drift", traj.max_trace_drift, 1e-9));
    let integrated = steady_by_integration(&gen)?;
    let null_space = liouvillian_steady_oracle(&gen)?;
    let min = [integrated.min_entry(), null_space.min_entry(), end.iter().copied().fold(f64::INFINITY, f64::min)]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    out.push(Check::at_least("min_entry", min, -1e-10));
    out.push(Check::at_most("steady_residual", steady_residual(&gen, &integrated.values), 1e-10).informational());
    let sums = gen.column_sums();
    let worst = (0..grid.len()).filter(|i| gen.is_interior(*i)).map(|i| sums[i].abs()).fold(0.0, f64::max);
    out.push(Check::at_most("interior_column_sum", worst, 1e-10));
    let p = reference_params().with_pump_ratio(2.0);
    out.push(Check::flag("csv_deterministic", csv_bytes(&p)? == csv_bytes(&p)?));
    Ok(())
}

/// Runs one criterion; solver errors become failing checks.
pub fn run_criterion(id: u8) -> CriterionReport {
    let (_, title, budget) = CRITERIA[(id - 1) as usize];
    let start = Instant::now();
    let mut checks = Vec::new();
    let result = match id {
        1 => criterion_1(&mut checks),
        2 => criterion_2(&mut checks),
        3 => criterion_3(&mut checks),
        4 => criterion_4(&mut checks),
        5 => criterion_5(&mut checks),
        6 => criterion_6(&mut checks),
        7 => criterion_7(&mut checks),
        8 => criterion_8(&mut checks),
        9 => criterion_9(&mut checks),
        10 => criterion_10(&mut checks),
        _ => unreachable!("criteria are numbered 1..=10"),
    };
    if let Err(e) = result {
        checks.push(Check::failure("scenario", &e));
    }
    CriterionReport { id, title, checks, seconds: start.elapsed().as_secs_f64(), budget_seconds: budget }
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().map(|(id, _, _)| run_criterion(*id)).collect()
}

/// Human-readable block for one criterion.
pub fn render(report: &CriterionReport) -> String {
    let mut s = format!(
        "criterion {:>2} {:<34} {}  ({:.2}s of {:.0}s)\n",
        report.id,
        report.title,
        if report.passed() { "PASS" } else { "FAIL" },
        report.seconds,
        report.budget_seconds
    );
    for c in &report.checks {
        let verdict = match (c.passed, c.gating) {
            (true, _) => "ok",
            (false, true) => "FAIL",
            (false, false) => "info",
        };
        s.push_str(&format!("    {:<40} {:>24}  {:<28} {verdict}\n", c.label, fmt_real(c.measured), c.bound));
    }
    s
}

pub fn write_validate_csv<W: Write>(out: W, reports: &[CriterionReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["criterion", "check", "measured", "bound", "gating", "passed", "seconds", "criterion_passed"])?;
    for r in reports {
        for c in &r.checks {
            w.write_record([
                r.id.to_string(),
                c.label.clone(),
                fmt_real(c.measured),
                c.bound.clone(),
                c.gating.to_string(),
                c.passed.to_string(),
                fmt_real(r.seconds),
                r.passed().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
