// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! CSV and SVG emission. Reals are written with 17 significant digits so that
//! re-reading reproduces them bit for bit.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::fock::PhotonDistribution;
use crate::observables::ObservableReport;

pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_distribution_csv<W: Write>(out: W, dist: &PhotonDistribution) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "p"])?;
    for (n, p) in dist.probs.iter().enumerate() {
        w.write_record([n.to_string(), fmt_real(*p)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `n,p` table back; rows must be in order starting at n = 0.
pub fn read_distribution_csv<R: Read>(input: R) -> Result<PhotonDistribution> {
    let mut r = csv::Reader::from_reader(input);
    let mut probs = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let n: usize = rec.get(0).unwrap_or("").parse().map_err(|_| Error::Config(format!("bad n on row {i}")))?;
        if n != i {
            return Err(Error::Config(format!("row {i} has n = {n}")));
        }
        let p: f64 = rec.get(1).unwrap_or("").parse().map_err(|_| Error::Config(format!("bad p on row {i}")))?;
        probs.push(p);
    }
    if probs.is_empty() {
        return Err(Error::Config("empty distribution".into()));
    }
    Ok(PhotonDistribution { probs })
}

pub const REPORT_COLUMNS: [&str; 18] = [
    "pump_rate",
    "pump_ratio",
    "gamma12",
    "nbar_alpha",
    "nbar_beta",
    "mandel_q_alpha",
    "g2_alpha",
    "linewidth_2d",
    "freq_shift",
    "petermann_k",
    "a",
    "b",
    "c1",
    "c2",
    "c3",
    "delta_bar",
    "iterations",
    "beta_fallback",
];

pub fn report_fields(r: &ObservableReport) -> Vec<String> {
    let reals = [
        r.pump_rate,
        r.pump_ratio,
        r.gamma12,
        r.nbar_alpha,
        r.nbar_beta,
        r.mandel_q_alpha,
        r.g2_alpha,
        r.linewidth_2d,
        r.freq_shift,
        r.petermann_k,
        r.a,
        r.b,
        r.c1,
        r.c2,
        r.c3,
        r.delta_bar,
    ];
    let mut v: Vec<String> = reals.iter().map(|x| fmt_real(*x)).collect();
    v.push(r.iterations.to_string());
    v.push(r.beta_fallback.to_string());
    v
}

/// Column value by name, for plotting.
pub fn report_column(r: &ObservableReport, name: &str) -> Option<f64> {
    let i = REPORT_COLUMNS.iter().position(|c| *c == name)?;
    match i {
        16 => Some(r.iterations as f64),
        17 => Some(r.beta_fallback as u8 as f64),
        _ => report_fields(r)[i].parse().ok(),
    }
}

pub fn write_report_csv<W: Write>(out: W, report: &ObservableReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    w.write_record(report_fields(report))?;
    w.flush()?;
    Ok(())
}

/// One sweep point: its index, swept value, and either a report or the error.
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub outcome: std::result::Result<ObservableReport, Error>,
}

pub fn write_sweep_csv<W: Write>(out: W, param: &str, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    // Prefixed so a swept report column (e.g. gamma12) is not duplicated.
    let swept = format!("swept_{param}");
    let mut header = vec!["index", swept.as_str(), "status", "error"];
    header.extend(REPORT_COLUMNS);
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.index.to_string(), fmt_real(row.value)];
        match &row.outcome {
            Ok(r) => {
                rec.push("ok".into());
                rec.push(String::new());
                rec.extend(report_fields(r));
            }
            Err(e) => {
                rec.push("failed".into());
                rec.push(format!("{}: {e}", e.kind()));
                rec.extend(std::iter::repeat_n(String::new(), REPORT_COLUMNS.len()));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "trace", "nbar_alpha", "nbar_beta"])?;
    for i in 0..traj.times.len() {
        w.write_record([
            fmt_real(traj.times[i]),
            fmt_real(traj.sum[i].re),
            fmt_real(traj.nbar_alpha[i]),
            fmt_real(traj.nbar_beta[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Minimal standalone SVG line plot. Non-finite points are skipped.
pub fn svg_line_plot(xs: &[f64], ys: &[f64], x_label: &str, y_label: &str, log_x: bool) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).map(|(x, y)| (tx(*x), *y)).filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    if !pts.is_empty() {
        let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
        let (x0, x1) = (fold(f64::min, f64::INFINITY, |p| p.0), fold(f64::max, f64::NEG_INFINITY, |p| p.0));
        let (y0, y1) = (fold(f64::min, f64::INFINITY, |p| p.1), fold(f64::max, f64::NEG_INFINITY, |p| p.1));
        let sx = |x: f64| m + if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.5 } * (w - 2.0 * m);
        let sy = |y: f64| h - m - if y1 > y0 { (y - y0) / (y1 - y0) } else { 0.5 } * (h - 2.0 * m);
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, path.join(" "));
        for (x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(*x), sy(*y));
        }
        let lx = |x: f64| if log_x { 10f64.powf(x) } else { x };
        let _ = writeln!(s, r#"<text x="{m}" y="{}" font-size="12">{:.4e}</text>"#, h - m + 18.0, lx(x0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{:.4e}</text>"#, w - m, h - m + 18.0, lx(x1));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{y0:.4e}</text>"#, m - 4.0, h - m);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{y1:.4e}</text>"#, m - 4.0, m + 10.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_seventeen_digits() {
        let x = 0.1f64 + 0.2;
        let s = fmt_real(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(fmt_real(f64::NAN), "NaN");
    }

    #[test]
    fn distribution_round_trip_is_exact() {
        let d = PhotonDistribution::thermal(2.7, 40);
        let mut buf = Vec::new();
        write_distribution_csv(&mut buf, &d).unwrap();
        let back = read_distribution_csv(buf.as_slice()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn plot_is_well_formed() {
        let svg = svg_line_plot(&[1.0, 10.0, 100.0], &[3.0, f64::NAN, 1.0], "r", "n", true);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
