// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use openlaser::config::ScenarioConfig;
use openlaser::dynamics::{build_diag_generator, integrate, IntegrateControls};
use openlaser::fock::{suggest_grid, DiagonalState};
use openlaser::observables::{measure_linewidth, ObservableReport};
use openlaser::output::{
    fmt_real, report_column, svg_line_plot, write_distribution_csv, write_report_csv, write_sweep_csv,
    write_trajectory_csv, SweepRow,
};
use openlaser::params::{derive_coeffs, validate_params, LaserParams};
use openlaser::steady::solve_steady_from;
use openlaser::validation::{render, run_criterion, write_validate_csv, CRITERIA};
use openlaser::{Error, Mode};

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(name = "openlaser", version, about = "Steady states, dynamics and linewidth of a two-mode open-cavity laser")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (flat key = value).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum)]
enum SweepParam {
    PumpRate,
    PumpRatio,
    Gamma12,
}

#[derive(Copy, Clone, ValueEnum, PartialEq)]
enum Scale {
    Linear,
    Log,
}

#[derive(Subcommand)]
enum Command {
    /// Self-consistent steady state and observables.
    Steady(Common),
    /// Time evolution of the diagonal sector from vacuum.
    Evolve(Common),
    /// Parameter sweep with one report row per point.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value = "linear")]
        scale: Scale,
        /// Report column to plot against the swept parameter.
        #[arg(long, default_value = "nbar_alpha")]
        column: String,
    },
    /// Linewidth and frequency shift from the decay of the first coherence.
    Linewidth(Common),
    /// Runs the acceptance suite.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Run only these criteria (1-10).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

enum Failure {
    Usage(String),
    Solver(Error),
    Partial(usize),
    Validation(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParam { .. } => Failure::Usage(e.to_string()),
            other => Failure::Solver(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Solver(Error::Io(e))
    }
}

struct Scenario {
    config: ScenarioConfig,
    params: LaserParams,
    out: PathBuf,
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    let config = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    let validated = validate_params(config.params())?;
    for w in &validated.warnings {
        eprintln!("warning: {w}");
    }
    let out = common.out.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    Ok(Scenario { config, params: validated.params, out })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn report_point(s: &Scenario, params: &LaserParams) -> Result<(ObservableReport, openlaser::steady::SelfConsistentSolution), Error> {
    let coeffs = derive_coeffs(params);
    let grid = s.config.grid(suggest_grid(&coeffs))?;
    ObservableReport::compute(params, grid, &s.config.solve_controls())
}

fn run_steady(common: &Common) -> Result<(), Failure> {
    let s = load(common)?;
    let (report, sol) = report_point(&s, &s.params)?;
    write_report_csv(create(&s.out, "report.csv")?, &report)?;
    write_distribution_csv(create(&s.out, "dist_alpha.csv")?, &sol.p_alpha)?;
    write_distribution_csv(create(&s.out, "dist_beta.csv")?, &sol.p_beta)?;
    println!(
        "pump_ratio {}  nbar_alpha {}  nbar_beta {}  g2 {}  iterations {}",
        fmt_real(report.pump_ratio),
        fmt_real(report.nbar_alpha),
        fmt_real(report.nbar_beta),
        fmt_real(report.g2_alpha),
        report.iterations
    );
    Ok(())
}

fn run_evolve(common: &Common) -> Result<(), Failure> {
    let s = load(common)?;
    let coeffs = derive_coeffs(&s.params);
    let grid = s.config.grid(suggest_grid(&coeffs))?.unwrap_or_else(|| suggest_grid(&coeffs));
    let gen = build_diag_generator(grid, &coeffs)?;
    let t_end = s.config.t_end.unwrap_or(10.0);
    let controls = IntegrateControls {
        rtol: s.config.rtol_integrate.unwrap_or(IntegrateControls::default().rtol),
        sample_interval: Some(s.config.sample_interval.unwrap_or(t_end / 200.0)),
        ..Default::default()
    };
    let (traj, end) = integrate(&gen, DiagonalState::new_vacuum(grid).values, t_end, &controls)?;
    write_trajectory_csv(create(&s.out, "trajectory.csv")?, &traj)?;
    let state = DiagonalState::from_values(grid, end)?;
    write_distribution_csv(create(&s.out, "dist_alpha.csv")?, &state.marginal(Mode::Alpha)?)?;
    write_distribution_csv(create(&s.out, "dist_beta.csv")?, &state.marginal(Mode::Beta)?)?;
    println!("t_end {}  steps {}  max trace drift {:.3e}", fmt_real(t_end), traj.steps, traj.max_trace_drift);
    Ok(())
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_sweep(
    common: &Common,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    scale: Scale,
    column: &str,
) -> Result<(), Failure> {
    if steps < 2 {
        return Err(Failure::Usage("--steps must be at least 2".into()));
    }
    if from.is_nan() || to.is_nan() || from >= to {
        return Err(Failure::Usage("--from must be below --to".into()));
    }
    if scale == Scale::Log && from <= 0.0 {
        return Err(Failure::Usage("log scale needs --from > 0".into()));
    }
    if !openlaser::output::REPORT_COLUMNS.contains(&column) {
        return Err(Failure::Usage(format!("unknown column `{column}`")));
    }
    let s = load(common)?;
    let values: Vec<f64> = (0..steps)
        .map(|i| {
            let f = i as f64 / (steps - 1) as f64;
            match scale {
                Scale::Linear => from + (to - from) * f,
                Scale::Log => (from.ln() + (to / from).ln() * f).exp(),
            }
        })
        .collect();
    let name = match param {
        SweepParam::PumpRate => "pump_rate",
        SweepParam::PumpRatio => "pump_ratio",
        SweepParam::Gamma12 => "gamma12",
    };
    let rows: Vec<SweepRow> = with_threads(common.threads, || {
        values
            .par_iter()
            .enumerate()
            .map(|(index, &value)| {
                let params = match param {
                    SweepParam::PumpRate => s.params.with_pump_rate(value),
                    SweepParam::PumpRatio => s.params.with_pump_ratio(value),
                    SweepParam::Gamma12 => s.params.with_gamma12(value),
                };
                let outcome = validate_params(params).and_then(|v| report_point(&s, &v.params).map(|r| r.0));
                SweepRow { index, value, outcome }
            })
            .collect()
    })?;
    write_sweep_csv(create(&s.out, "sweep.csv")?, name, &rows)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .map(|r| (r.value, r.outcome.as_ref().ok().and_then(|rep| report_column(rep, column)).unwrap_or(f64::NAN)))
        .unzip();
    fs::write(s.out.join("sweep.svg"), svg_line_plot(&xs, &ys, name, column, scale == Scale::Log))?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    for r in rows.iter().filter(|r| r.outcome.is_err()) {
        if let Err(e) = &r.outcome {
            eprintln!("error kind={} point={} {name}={} message=\"{e}\"", e.kind(), r.index, fmt_real(r.value));
        }
    }
    println!("{} points, {} failed", rows.len(), failed);
    if failed > 0 {
        return Err(Failure::Partial(failed));
    }
    Ok(())
}

fn run_linewidth(common: &Common) -> Result<(), Failure> {
    let s = load(common)?;
    let coeffs = derive_coeffs(&s.params);
    let grid = s.config.grid(suggest_grid(&coeffs))?.unwrap_or_else(|| suggest_grid(&coeffs));
    let sol = solve_steady_from(&coeffs, grid, &s.config.solve_controls())?;
    let m = measure_linewidth(&coeffs, &sol)?;
    let mut w = csv::Writer::from_writer(create(&s.out, "linewidth.csv")?);
    w.write_record(["nbar_alpha", "fwhm", "linewidth_formula", "shift", "shift_formula", "fit_points"])
        .map_err(Error::from)?;
    w.write_record([
        fmt_real(m.nbar_alpha),
        fmt_real(m.fwhm),
        fmt_real(m.predicted_linewidth),
        fmt_real(m.shift),
        fmt_real(m.predicted_shift),
        m.fit.points.to_string(),
    ])
    .map_err(Error::from)?;
    w.flush()?;
    let mut w = csv::Writer::from_writer(create(&s.out, "block_trajectory.csv")?);
    w.write_record(["t", "abs_sum", "arg_sum_rotating_frame"]).map_err(Error::from)?;
    for (t, z) in m.trajectory.times.iter().zip(&m.trajectory.sum) {
        w.write_record([fmt_real(*t), fmt_real(z.norm()), fmt_real(z.arg())]).map_err(Error::from)?;
    }
    w.flush()?;
    println!(
        "fwhm {}  formula {}  shift {}  formula {}",
        fmt_real(m.fwhm),
        fmt_real(m.predicted_linewidth),
        fmt_real(m.shift),
        fmt_real(m.predicted_shift)
    );
    Ok(())
}

fn run_validate(common: &Common, only: &[u8]) -> Result<(), Failure> {
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    if let Some(bad) = only.iter().find(|id| !(1..=10).contains(*id)) {
        return Err(Failure::Usage(format!("no criterion {bad}")));
    }
    let ids: Vec<u8> = CRITERIA.iter().map(|c| c.0).filter(|id| only.is_empty() || only.contains(id)).collect();
    let mut reports = Vec::new();
    for id in ids {
        let r = run_criterion(id);
        print!("{}", render(&r));
        reports.push(r);
    }
    write_validate_csv(create(&out, "validate.csv")?, &reports)?;
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
    if failed > 0 {
        return Err(Failure::Validation(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Steady(c) => run_steady(c),
        Command::Evolve(c) => run_evolve(c),
        Command::Sweep { common, param, from, to, steps, scale, column } => {
            run_sweep(common, *param, *from, *to, *steps, *scale, column)
        }
        Command::Linewidth(c) => run_linewidth(c),
        Command::Validate { common, only } => run_validate(common, only),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error kind=usage message=\"{msg}\"");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error kind={} message=\"{e}\"", e.kind());
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Partial(n)) => {
            eprintln!("error kind=partial_sweep failed_points={n}");
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(Failure::Validation(n)) => {
            eprintln!("error kind=validation failed_criteria={n}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
