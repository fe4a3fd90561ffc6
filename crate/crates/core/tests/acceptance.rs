// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Each test runs one criterion through the validation
//! harness, prints a single verdict line with the pinned tolerances, and
//! cross-checks the headline numbers against values computed here directly
//! from the raw parameters.
//!
//! Criterion 1 is a known failure: its first check asks the weak-pump
//! distribution to be geometric to 1e-3 while the cross-damping term of the
//! reference parameters moves it by about 3e-2. Its test asserts the red
//! verdict together with the evidence that the deviation comes from that term.

use std::io::Write;

use openlaser::fock::PhotonDistribution;
use openlaser::observables::{g2_zero, linewidth, mandel_q};
use openlaser::params::{derive_coeffs, LaserParams};
use openlaser::steady::{solve_steady, SolveControls};
use openlaser::validation::{oracle_scenario, render, run_criterion, CriterionReport};
use openlaser::Mode;

// Reference parameters, spelled out so the expected values below do not
// route through the library's own coefficient code.
const G1: f64 = 0.05;
const G2: f64 = 0.07;
const DETUNING: f64 = 3.0;
const GAMMA11: f64 = 6.0;
const GAMMA22: f64 = 5.0;
const GAMMA12: f64 = 5.5;

fn coupling_sq() -> f64 {
    G1 * G1 + G2 * G2
}

fn alpha_damping(gamma12: f64) -> f64 {
    2.0 / coupling_sq() * (GAMMA11 * G1 * G1 + 2.0 * gamma12 * G1 * G2 + GAMMA22 * G2 * G2)
}

fn effective_threshold_damping(gamma12: f64) -> f64 {
    alpha_damping(gamma12) * (1.0 + DETUNING * DETUNING)
}

/// Writes straight to the stderr handle so the verdicts appear in a plain
/// `cargo test` log; the print macros would be captured.
fn run(id: u8) -> CriterionReport {
    let report = run_criterion(id);
    let block = format!(
        "{}acceptance criterion {id:>2}: {}\n",
        render(&report),
        if report.passed() { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(block.as_bytes());
    report
}

fn measured(report: &CriterionReport, label: &str) -> f64 {
    report.check(label).unwrap_or_else(|| panic!("criterion {} has no check `{label}`", report.id)).measured
}

fn geometric(mean: f64, n_max: usize) -> Vec<f64> {
    let x = mean / (1.0 + mean);
    let w: Vec<f64> = (0..=n_max).map(|n| x.powi(n as i32)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

fn tv(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n).map(|i| (p.get(i).unwrap_or(&0.0) - q.get(i).unwrap_or(&0.0)).abs()).sum::<f64>()
}

#[test]
fn criterion_01_thermal_limit() {
    let report = run(1);
    let tv_b0 = measured(&report, "tv_geometric_b0");
    let tv_b = measured(&report, "tv_geometric_physical_b");

    // At A = C̃1/2 the unsaturated law is geometric with ratio 1/2, mean 1.
    let p = LaserParams::reference().with_pump_ratio(0.5);
    let sol = solve_steady(&derive_coeffs(&p).without_saturation(), &SolveControls::default()).unwrap();
    let own = tv(&sol.p_alpha.probs, &geometric(1.0, sol.p_alpha.n_max()));
    assert!((own - tv_b0).abs() < 1e-12, "harness {tv_b0} vs direct {own}");
    assert!(tv_b <= 0.05, "physical saturation half: {tv_b}");

    // The red verdict is pinned to its documented cause: switching off the
    // cross-damping term restores the geometric law to round-off.
    assert!(!report.passed());
    assert!((0.02..0.05).contains(&tv_b0), "deviation moved: {tv_b0}");
    let g = (coupling_sq() / 2.0).sqrt();
    let sym = LaserParams { g1: g, g2: g, delta: DETUNING, gamma11: 5.5, gamma22: 5.5, gamma12: 2.0, pump_rate: 0.0 };
    let c = derive_coeffs(&sym.with_pump_ratio(0.5)).without_saturation();
    assert_eq!(c.c3, 0.0);
    let sol = solve_steady(&c, &SolveControls::default()).unwrap();
    assert!(tv(&sol.p_alpha.probs, &geometric(1.0, sol.p_alpha.n_max())) < 1e-12);
}

#[test]
fn criterion_02_mean_above_threshold() {
    let report = run(2);
    let expected = (1.0 + DETUNING * DETUNING) / (4.0 * coupling_sq());
    assert!((expected - 337.837_837_837_8).abs() < 1e-9);
    let nbar = measured(&report, "nbar_alpha");
    assert!((nbar / expected - 1.0).abs() <= 0.02, "{nbar}");
    assert!(report.passed());
}

#[test]
fn criterion_03_fluctuations() {
    let report = run(3);
    // Q target A/(C̃1 − A) at A = C̃1/2.
    let q = measured(&report, "mandel_q_half_threshold");
    assert!((q - 1.0).abs() <= 0.05, "{q}");
    for g12 in [0.0, 4.0] {
        let below = measured(&report, &format!("g2_below_gamma12_{g12}"));
        let above = measured(&report, &format!("g2_above_gamma12_{g12}"));
        assert!((1.9..=2.0).contains(&below) && (1.0..=1.1).contains(&above), "γ12 = {g12}: {below}, {above}");
    }
    // Moments recomputed by hand from the steady distribution.
    let p = LaserParams::reference().with_pump_ratio(0.5);
    let sol = solve_steady(&derive_coeffs(&p), &SolveControls::default()).unwrap();
    let (m1, m2) = sol.p_alpha.probs.iter().enumerate().fold((0.0, 0.0), |(a, b), (n, w)| {
        let n = n as f64;
        (a + n * w, b + n * n * w)
    });
    let q_direct = (m2 - m1 * m1 - m1) / m1;
    assert!((q_direct - q).abs() < 1e-12);
    assert!((g2_zero(&sol.p_alpha).unwrap() - (m2 - m1) / (m1 * m1)).abs() < 1e-12);
    assert!(report.passed());
}

#[test]
fn criterion_04_beta_suppression() {
    let report = run(4);
    assert!(measured(&report, "nbar_ratio") < 1e-2);
    assert_eq!(measured(&report, "vacuum_beta_without_cross_term"), 1.0);
    assert!(report.passed());
}

#[test]
fn criterion_05_oracle_equivalence() {
    let report = run(5);
    assert!(report.passed());
    // Marginal of the null-space state summed by hand.
    let s = oracle_scenario().unwrap();
    let grid = s.null_space.grid;
    let mut marginal = vec![0.0; grid.n_max_alpha + 1];
    for (i, v) in s.null_space.values.iter().enumerate() {
        marginal[grid.coords(i).0] += v;
    }
    let d = tv(&marginal, &s.recurrence_alpha.probs);
    assert!((d - measured(&report, "tv_null_space_vs_recurrence")).abs() < 1e-12);
    assert!(d <= 0.05);
    let via_lib = s.null_space.marginal(Mode::Alpha).unwrap();
    assert!((via_lib.mean() - marginal.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>()).abs() < 1e-12);
    assert!((3.0..=7.0).contains(&s.nbar_alpha));
}

#[test]
fn criterion_06_derivation_chain() {
    let report = run(6);
    assert!(measured(&report, "max_rel_kernel_mismatch") <= 1e-6);
    // Vacuum emission rate r ∫ e^{−τ} sin²(gτ) dτ, by composite Simpson on [0, 60].
    let g = coupling_sq().sqrt();
    let (n, t_max) = (600_000usize, 60.0);
    let h = t_max / n as f64;
    let f = |t: f64| (-t).exp() * (g * t).sin().powi(2);
    let mut acc = f(0.0) + f(t_max);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let expected = 5000.0 * acc * h / 3.0;
    let rate = measured(&report, "vacuum_gain_rate");
    assert!((rate / expected - 1.0).abs() <= 1e-8, "{rate} vs {expected}");
    assert!(report.passed());
}

#[test]
fn criterion_07_linewidth_and_shift() {
    let report = run(7);
    assert!((measured(&report, "fwhm_resonant") / linewidth_target_resonant() - 1.0).abs() <= 0.1);
    // Unsaturated resonant limit (A + C1)/(4n̄), evaluated by hand.
    let c1 = alpha_damping(GAMMA12);
    let pump_a = 2.0 * c1;
    let n = 1e12;
    let c = derive_coeffs(&LaserParams::reference().with_delta(0.0).with_pump_ratio(2.0)).without_saturation();
    assert!((c.a / pump_a - 1.0).abs() < 1e-12);
    let full = linewidth(&c, n);
    assert!((full / ((pump_a + c1) / (4.0 * n)) - 1.0).abs() <= 1e-10);
    assert!(report.passed());
}

/// Closed-form linewidth of the resonant rate scenario at its own steady mean.
fn linewidth_target_resonant() -> f64 {
    let p = openlaser::validation::resonant_linewidth_params();
    let c = derive_coeffs(&p);
    let nbar = solve_steady(&c, &SolveControls::default()).unwrap().nbar_alpha;
    let ba = 4.0 * p.coupling_sq();
    let den = 1.0 + ba * (nbar + 1.5) + (ba / 4.0).powi(2);
    0.25 * ((c.a / (nbar + 1.0) + 2.0 * c.a * ba) / den + c.c1 / nbar)
}

#[test]
fn criterion_08_petermann() {
    let report = run(8);
    assert_eq!(measured(&report, "k_closed_is_one"), 1.0);
    assert_eq!(measured(&report, "k_strictly_increasing"), 1.0);
    // g1 = g2 = 0.01, γ11 = γ22 = 6: C1 = 12 + 2γ12, and A = 1000 at
    // fifty times the γ12 = 4 threshold.
    for g12 in [2.0, 4.0] {
        let (c1g, c10, a) = (12.0 + 2.0 * g12, 12.0, 1000.0);
        let closed_form = c1g * (a + c1g) * (a - c10) / (c10 * (a - c1g) * (a + c10));
        let k = measured(&report, &format!("k_numeric_vs_closed_form_{g12}"));
        assert!((k / closed_form - 1.0).abs() <= 0.05, "γ12 = {g12}: {k} vs {closed_form}");
    }
    assert!(report.passed());
}

#[test]
fn criterion_09_threshold_curve() {
    let report = run(9);
    let r_th = effective_threshold_damping(GAMMA12) / (2.0 * coupling_sq());
    assert!((r_th - 1.56 / (0.0074 * 0.0148)).abs() < 1e-8);
    assert!((measured(&report, "r_th") - r_th).abs() < 1e-9 * r_th);
    assert_eq!(format!("{:.3e}", r_th), "1.424e4");
    // Slope per unit γ12 is 4 g1 g2 (1 + δ²) / (2 g⁴).
    let slope = (effective_threshold_damping(1.0) - effective_threshold_damping(0.0)) / (2.0 * coupling_sq());
    let expected = 4.0 * G1 * G2 * (1.0 + DETUNING * DETUNING) / (2.0 * coupling_sq().powi(2));
    assert!((slope / expected - 1.0).abs() < 1e-12 && slope > 0.0);
    assert!(report.passed());
}

#[test]
fn criterion_10_structural_invariants() {
    let report = run(10);
    assert!(measured(&report, "trace_drift") <= 1e-9);
    assert!(measured(&report, "min_entry") >= -1e-10);
    assert!(measured(&report, "interior_column_sum") <= 1e-10);
    assert_eq!(measured(&report, "csv_deterministic"), 1.0);
    // A thermal distribution's moments survive the harness's number format.
    let d = PhotonDistribution::thermal(7.5, 200);
    let q = mandel_q(&d).unwrap();
    let reparsed: f64 = openlaser::output::fmt_real(q).parse().unwrap();
    assert_eq!(reparsed, q);
    assert!(report.passed());
}
