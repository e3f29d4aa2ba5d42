//! End-to-end runs of [`run`] on temporary output directories.

use std::path::Path;
use std::sync::Once;

use serde_json::Value;

use super::run;

static EPOCH: Once = Once::new();

/// Runs `slipcontact <args> --out-dir <dir>` and returns the exit code.
fn exec(dir: &Path, args: &[&str]) -> i32 {
    EPOCH.call_once(|| std::env::set_var("SOURCE_DATE_EPOCH", "1700000000"));
    let mut argv = vec!["slipcontact".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out-dir".into());
    argv.push(dir.to_string_lossy().into_owned());
    run(argv)
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn verify_all_is_green_for_slip() {
    let dir = tempfile::tempdir().unwrap();
    let out = exec(dir.path(), &["verify", "all", "--regime", "slip", "--h", "1e-4"]);
    assert_eq!(out, 0);
    let r = report(dir.path(), "verify_all.json");
    assert_eq!(r["schema"], "slipcontact.report/1");
    assert_eq!(r["timestamp"], 1700000000);
    assert_eq!(r["pass"], true);
    let checks = r["checks"].as_array().unwrap();
    for name in ["aperture_divergence_analytic", "aperture_divergence_fd", "wall_navier", "aperture_flux"] {
        let c = checks.iter().find(|c| c["name"] == name).unwrap();
        assert_eq!(c["pass"], true, "{name}");
        assert!(!c["anchor"].as_str().unwrap().is_empty());
    }
}

#[test]
fn drag_scan_writes_one_row_per_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = exec(dir.path(), &["drag", "scan", "--regime", "slip", "--h-list", "1e-2,1e-3,1e-4,1e-5,1e-6"]);
    assert_eq!(out, 0);
    let text = std::fs::read_to_string(dir.path().join("drag_scan.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "h,E_total,E_grad,E_sphere,E_wall,n");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| !r.contains(' ')));
    assert!(rows[0].starts_with("1e-2,"));
}

#[test]
fn mixed_fall_never_touches() {
    let dir = tempfile::tempdir().unwrap();
    let out = exec(dir.path(), &["fall", "simulate", "--regime", "mixed", "--h0", "0.25", "--t-max", "50"]);
    assert_eq!(out, 0);
    let r = report(dir.path(), "fall_event.json");
    assert_eq!(r["data"]["event"]["kind"], "NoContact");
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,h,h_prime\n"));
    assert!(csv.lines().count() <= 10_002);
}

#[test]
fn slip_fall_scan_touches_down_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let out = exec(dir.path(), &["fall", "scan", "--regime", "slip"]);
    assert_eq!(out, 0);
    let csv = std::fs::read_to_string(dir.path().join("fall_scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 18);
    assert!(csv.lines().skip(1).all(|l| l.contains(",Touchdown,")));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let out = exec(a.path(), &["drag", "scan", "--regime", "mixed", "--beta-omega", "2", "--h-list", "1e-3,1e-4"]);
    assert_eq!(out, 0);
    let first = report(a.path(), "drag_scan.json");
    let cfg = a.path().join("echo.json");
    std::fs::write(&cfg, serde_json::to_vec(&first["config"]).unwrap()).unwrap();

    let b = tempfile::tempdir().unwrap();
    let out = exec(b.path(), &["drag", "scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out, 0);
    for f in ["drag_scan.json", "drag_scan.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"regime": "mixed", "h": 0.01, "samples": 100}"#).unwrap();
    let out = exec(dir.path(), &["field", "verify", "--config", cfg.to_str().unwrap(), "--h", "0.001"]);
    assert_eq!(out, 0);
    let r = report(dir.path(), "field_verify.json");
    assert_eq!(r["config"]["regime"], "mixed");
    assert_eq!(r["config"]["h"], 0.001);
    assert_eq!(r["config"]["samples"], 100);
}

#[test]
fn perfect_slip_round_trips_as_null() {
    let dir = tempfile::tempdir().unwrap();
    let out = exec(dir.path(), &["drag", "scan", "--beta-s", "inf", "--h-list", "1e-3,1e-4"]);
    assert_eq!(out, 0);
    let r = report(dir.path(), "drag_scan.json");
    assert!(r["config"]["beta_s"].is_null());
    assert!(r["data"]["curve"]["regime"]["beta_s"].is_null());
    let input = dir.path().join("drag_scan.json");
    let out = exec(dir.path(), &["fall", "simulate", "--drag-source", "table", "--input", input.to_str().unwrap()]);
    assert_eq!(out, 0);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<Value> = [1e-3, 1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&h: &f64| {
            let d = 1.0 / h;
            serde_json::json!({"h": h, "energy": d, "gradient": d, "sphere": 0.0, "wall": 0.0, "surface_drag": d})
        })
        .collect();
    let curve = serde_json::json!({
        "regime": {"kind": "slip", "beta_s": 1.0, "beta_omega": 1.0},
        "rows": rows,
        "meta": {"delta": 0.2, "d_delta": 4.0, "h_max": 0.5, "rel_tol": 1e-9, "abs_tol": 1e-13,
                 "beta_s": 1.0, "beta_omega": 1.0},
    });
    let input = dir.path().join("curve.json");
    std::fs::write(&input, serde_json::to_vec(&curve).unwrap()).unwrap();
    let out = exec(dir.path(), &["drag", "fit", "--input", input.to_str().unwrap()]);
    assert_eq!(out, 1);
    let r = report(dir.path(), "drag_fit.json");
    assert_eq!(r["pass"], false);
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(exec(dir.path(), &["drag", "scan", "--delta", "0.3"]), 2);
    assert_eq!(exec(dir.path(), &["verify", "all", "--regime", "no_slip"]), 2);
    assert_eq!(exec(dir.path(), &["drag", "smear"]), 2);
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"delta": 0.2, "bogus": 1}"#).unwrap();
    assert_eq!(exec(dir.path(), &["profile", "check", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(exec(dir.path(), &["profile", "check", "--config", "/nonexistent.json"]), 2);
    assert!(!dir.path().join("profile_check.json").exists());
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = exec(dir.path(), &["field", "verify", "--max-depth", "1", "--rel-tol", "1e-14", "--abs-tol", "0"]);
    assert_eq!(out, 3);
}

#[test]
fn out_dir_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var(crate::OUT_DIR_ENV, dir.path());
    assert_eq!(run(["slipcontact", "integral", "classify", "--p", "0", "--q", "2"]), 0);
    let csv = std::fs::read_to_string(dir.path().join("integral_classify.csv")).unwrap();
    assert!(csv.starts_with("h,I,model\n"));
    let r = report(dir.path(), "integral_classify.json");
    assert_eq!(r["data"]["case"]["class"]["kind"], "power_law");
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(["slipcontact", "--version"]), 0);
    assert_eq!(run(["slipcontact", "fall", "--help"]), 0);
}
