//! Command-line front end for `slipcontact`.
//!
//! Every subcommand writes a versioned JSON report (and CSV data where it
//! applies) into the output directory and maps its outcome to an exit code:
//! 0 all checks pass, 1 a check failed, 2 bad input or I/O, 3 numerical failure.

pub mod checks;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use slipcontact::drag::{DragCurve, DragModel};
use slipcontact::dynamics::{drag_law, simulate, touchdown_scan, CellOutcome, DragLaw, DragSource};

use config::{DragSourceName, Overrides, RunConfig};
use report::{num, write_csv, write_json, Check, Report};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SLIPCONTACT_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "slipcontact", version, about = "Sphere-wall lubrication fields, drag scaling and contact dynamics")]
struct Cli {
    /// Flat JSON configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $SLIPCONTACT_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Group,
}

#[derive(Debug, Subcommand)]
enum Group {
    Profile {
        #[command(subcommand)]
        cmd: ProfileCmd,
    },
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    Drag {
        #[command(subcommand)]
        cmd: DragCmd,
    },
    Integral {
        #[command(subcommand)]
        cmd: IntegralCmd,
    },
    Fall {
        #[command(subcommand)]
        cmd: FallCmd,
    },
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Debug, Subcommand)]
enum ProfileCmd {
    /// Boundary identities of the cubic profile on random draws, and its limits.
    Check,
}

#[derive(Debug, Subcommand)]
enum FieldCmd {
    /// Divergence, flux and boundary residuals of the test field at gap `h`.
    Verify,
}

#[derive(Debug, Subcommand)]
enum DragCmd {
    /// Energy and surface drag over `h_list`.
    Scan,
    /// Log and inverse scaling fits of a drag curve (`--input`, or a fresh scan).
    Fit,
}

#[derive(Debug, Subcommand)]
enum IntegralCmd {
    /// Growth class of `int_0^delta r^p / (h + r^2)^q dr` as `h -> 0`.
    Classify,
}

#[derive(Debug, Subcommand)]
enum FallCmd {
    /// One trajectory from `(h0, v0)`.
    Simulate,
    /// Touchdown outcome over the `kappa_list x g_list x h0_list` grid.
    Scan,
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    /// Profile, field, integral, integrator and envelope checks in one report.
    All,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(slipcontact::Error),
    Io(PathBuf, std::io::Error),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<slipcontact::Error> for Failure {
    fn from(e: slipcontact::Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<bool, Failure>;

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(path.clone(), e))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Outcome {
    let cfg = load_config(&cli)?;
    let out = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Usage(e.to_string()))?;
    pool.install(|| dispatch(&cli.command, &cfg, &out))
}

fn dispatch(cmd: &Group, cfg: &RunConfig, out: &Path) -> Outcome {
    match cmd {
        Group::Profile { cmd: ProfileCmd::Check } => {
            let (checks, data) = checks::profile_suite(cfg)?;
            finish(out, "profile_check.json", Report::new("profile check", cfg, checks, data))
        }
        Group::Field { cmd: FieldCmd::Verify } => {
            let (checks, data) = checks::field_suite(cfg)?;
            finish(out, "field_verify.json", Report::new("field verify", cfg, checks, data))
        }
        Group::Drag { cmd: DragCmd::Scan } => drag_scan(cfg, out),
        Group::Drag { cmd: DragCmd::Fit } => {
            let curve = curve_for(cfg)?;
            let (checks, data) = checks::fit_suite(cfg, &curve)?;
            finish(out, "drag_fit.json", Report::new("drag fit", cfg, checks, data))
        }
        Group::Integral { cmd: IntegralCmd::Classify } => integral_classify(cfg, out),
        Group::Fall { cmd: FallCmd::Simulate } => fall_simulate(cfg, out),
        Group::Fall { cmd: FallCmd::Scan } => fall_scan(cfg, out),
        Group::Verify { cmd: VerifyCmd::All } => verify_all(cfg, out),
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(path.to_path_buf(), e)
}

/// Writes the report, prints one line per check and returns the overall verdict.
fn finish(out: &Path, name: &str, report: Report) -> Outcome {
    let path = out.join(name);
    write_json(&path, &report).map_err(io(&path))?;
    for c in &report.checks {
        let m = c.measured.map_or("nan".to_string(), |v| format!("{v:.3e}"));
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {} measured {m} {} {:e}", c.name, serde_json::to_value(c.comparison).unwrap_or_default().as_str().unwrap_or("?"), c.threshold);
    }
    println!("{} -> {}", report.command, path.display());
    Ok(report.pass)
}

fn drag_model(cfg: &RunConfig) -> Result<DragModel, Failure> {
    Ok(DragModel::new(cfg.slip_regime()?, cfg.delta, cfg.d_delta, cfg.h_max, cfg.quadrature())?)
}

/// The curve in `cfg.input` (a `drag scan` report or a bare curve), else a fresh scan.
fn curve_for(cfg: &RunConfig) -> Result<DragCurve, Failure> {
    let Some(input) = &cfg.input else {
        return Ok(drag_model(cfg)?.scan(&cfg.h_list)?);
    };
    let path = PathBuf::from(input);
    let text = std::fs::read_to_string(&path).map_err(io(&path))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{input}: {e}")))?;
    let curve = value.get("data").and_then(|d| d.get("curve")).cloned().unwrap_or(value);
    let curve: DragCurve =
        serde_json::from_value(curve).map_err(|e| Failure::Usage(format!("{input}: not a drag curve: {e}")))?;
    curve.validate()?;
    Ok(curve)
}

fn drag_scan(cfg: &RunConfig, out: &Path) -> Outcome {
    let curve = drag_model(cfg)?.scan(&cfg.h_list)?;
    let rows: Vec<Vec<String>> = curve
        .rows
        .iter()
        .map(|r| vec![num(r.h), num(r.energy), num(r.gradient), num(r.sphere), num(r.wall), num(r.surface_drag)])
        .collect();
    let path = out.join("drag_scan.csv");
    write_csv(&path, &["h", "E_total", "E_grad", "E_sphere", "E_wall", "n"], &rows).map_err(io(&path))?;
    let checks = vec![
        Check::holds(
            "energy_positive",
            "D(h) > 0",
            curve.rows.iter().all(|r| r.energy > 0.0),
        ),
        Check::holds(
            "energy_increases_as_gap_closes",
            "D(h) grows as h -> 0",
            curve.rows.windows(2).all(|w| w[1].energy > w[0].energy),
        ),
    ];
    finish(out, "drag_scan.json", Report::new("drag scan", cfg, checks, json!({ "curve": curve })))
}

fn integral_classify(cfg: &RunConfig, out: &Path) -> Outcome {
    use slipcontact::quadrature::{classify_singular, SingularClass};
    let c = classify_singular(cfg.p, cfg.q, cfg.integral_delta, &cfg.h_list)?;
    let kappa = c.increment_exponent.clamp(0.1, 2.0);
    let predict = |h: f64| match c.class {
        SingularClass::PowerLaw { .. } => (c.power_fit.intercept + c.power_fit.slope * h.ln()).exp(),
        SingularClass::Log => c.log_fit.intercept + c.log_fit.slope * h.ln(),
        SingularClass::Bounded => c.bounded_fit.intercept + c.bounded_fit.slope * h.powf(kappa),
    };
    let rows: Vec<Vec<String>> = c.samples.iter().map(|&(h, v)| vec![num(h), num(v), num(predict(h))]).collect();
    let path = out.join("integral_classify.csv");
    write_csv(&path, &["h", "I", "model"], &rows).map_err(io(&path))?;
    let mut checks = vec![Check::holds(
        "class_matches_prediction",
        "power / log / bounded trichotomy of the model integral",
        c.agrees_with_prediction(),
    )];
    if let Some(e) = c.oracle_rel_error {
        checks.push(Check::at_most("closed_form", "p = q = 1 equals 0.5 ln((h + delta^2) / h)", e, 1e-8));
    }
    finish(out, "integral_classify.json", Report::new("integral classify", cfg, checks, json!({ "case": c })))
}

fn fall_law(cfg: &RunConfig) -> Result<DragLaw, Failure> {
    let regime = cfg.slip_regime()?;
    match cfg.drag_source {
        DragSourceName::Analytic => Ok(drag_law(&regime, DragSource::Analytic)?),
        DragSourceName::Table => {
            let curve = curve_for(cfg)?;
            Ok(drag_law(&curve.regime, DragSource::Table(&curve, cfg.column))?)
        }
    }
}

fn fall_simulate(cfg: &RunConfig, out: &Path) -> Outcome {
    let law = fall_law(cfg)?;
    let tr = simulate(&cfg.fall(), &law, cfg.h0, cfg.v0, &cfg.ode())?;
    let stride = tr.rows.len().div_ceil(cfg.max_rows).max(1);
    let last = tr.rows.len() - 1;
    let rows: Vec<Vec<String>> = tr
        .rows
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i == last)
        .map(|(_, r)| vec![num(r.t), num(r.h), num(r.h_prime)])
        .collect();
    let path = out.join("trajectory.csv");
    write_csv(&path, &["t", "h", "h_prime"], &rows).map_err(io(&path))?;
    let checks = vec![Check::at_least("gap_nonnegative", "h(t) >= 0", tr.min_gap(), 0.0)];
    let data = json!({
        "event": tr.event,
        "law": law,
        "min_gap": tr.min_gap(),
        "accepted": tr.accepted,
        "rejected": tr.rejected,
        "log_phase_start": tr.log_phase_start,
        "rows_written": rows.len(),
    });
    finish(out, "fall_event.json", Report::new("fall simulate", cfg, checks, data))
}

fn fall_scan(cfg: &RunConfig, out: &Path) -> Outcome {
    let law = fall_law(cfg)?;
    let cells = touchdown_scan(&cfg.scan_grid(), &law, &cfg.ode());
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            let (kind, t, speed, h_min, msg) = match &c.outcome {
                CellOutcome::Touchdown { t, speed } => ("Touchdown", *t, *speed, f64::NAN, ""),
                CellOutcome::NoContact { h_min } => ("NoContact", f64::NAN, f64::NAN, *h_min, ""),
                CellOutcome::Escaped { t } => ("Escaped", *t, f64::NAN, f64::NAN, ""),
                CellOutcome::Failed { message } => ("Failed", f64::NAN, f64::NAN, f64::NAN, message.as_str()),
            };
            vec![num(c.kappa), num(c.g), num(c.h0), kind.into(), num(t), num(speed), num(h_min), msg.into()]
        })
        .collect();
    let path = out.join("fall_scan.csv");
    write_csv(&path, &["kappa", "g", "h0", "outcome", "t", "speed", "h_min", "message"], &rows)
        .map_err(io(&path))?;
    let failed = cells.iter().filter(|c| matches!(c.outcome, CellOutcome::Failed { .. })).count();
    let checks = vec![Check::at_most("failed_cells", "every cell integrates", failed as f64, 0.0)];
    finish(out, "fall_scan.json", Report::new("fall scan", cfg, checks, json!({ "law": law, "cells": cells })))
}

fn verify_all(cfg: &RunConfig, out: &Path) -> Outcome {
    let model = drag_model(cfg)?;
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();
    for (name, result) in [
        ("profile", checks::profile_suite(cfg)),
        ("field", checks::field_suite(cfg)),
        ("integral", checks::integral_suite(cfg)),
        ("dynamics", checks::dynamics_suite(cfg)),
        ("envelope", checks::envelope_suite(cfg, &model)),
    ] {
        let (c, d) = result?;
        checks.extend(c);
        data.insert(name.into(), d);
    }
    finish(out, "verify_all.json", Report::new("verify all", cfg, checks, Value::Object(data)))
}

#[cfg(test)]
mod tests;
