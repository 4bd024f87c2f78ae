use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curvature-gauge"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("curvature-gauge-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn strip_wall_time(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_time");
            map.values_mut().for_each(strip_wall_time);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_wall_time),
        _ => {}
    }
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn quantity(r: &Value, name: &str) -> f64 {
    r["quantities"].as_array().unwrap().iter().find(|q| q["name"] == name).unwrap()["value"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn chern_lashof_passes_on_the_product() {
    let dir = scratch("cl");
    let status = bin()
        .args(["chern-lashof", "--manifold", "s2xs2", "--r1", "1", "--r2", "1", "--fiber-n", "256", "--level", "3", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let r = report(&dir);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["status"], "pass");
    let four_pi_cubed = 4.0 * std::f64::consts::PI.powi(3);
    assert!((quantity(&r, "lhs") - four_pi_cubed).abs() < 1e-3 * four_pi_cubed);
    assert!((quantity(&r, "rhs") - four_pi_cubed).abs() < 1e-3 * four_pi_cubed);
}

#[test]
fn estimate_is_byte_identical_across_runs() {
    let args = ["estimate-constant", "--n", "4", "--p", "2", "--mode", "prop24", "--delta", "0.5", "--budget", "4000", "--seed", "7"];
    let runs: Vec<(Value, String)> = (0..2)
        .map(|i| {
            let dir = scratch(&format!("est{i}"));
            let out = bin().args(args).arg("--out").arg(&dir).output().unwrap();
            assert!(out.status.success());
            let mut v = report(&dir);
            strip_wall_time(&mut v);
            (v.clone(), serde_json::to_string(&v).unwrap())
        })
        .collect();
    assert_eq!(runs[0].1, runs[1].1);
    assert!(quantity(&runs[0].0, "estimated_min") > 0.0);
}

#[test]
fn counterexample_writes_lf_series() {
    let dir = scratch("seq");
    let out = bin().args(["counterexample", "--n", "4", "--p", "2", "--m-max", "64", "--out"]).arg(&dir).output().unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("series.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,gamma_norm,sc,rho,sigma,ratio");
    assert_eq!(lines.len(), 5);
    let ratios: Vec<f64> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().args(["chern-lashof", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["no-such-suite"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_one() {
    let dir = scratch("empty");
    let out = bin().args(["estimate-constant", "--delta", "2", "--budget", "2000", "--out"]).arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no admissible form"));
}

#[test]
fn reported_only_comparison_never_fails_the_run() {
    let dir = scratch("thm");
    let out = bin()
        .args(["theorem-functional", "--manifold", "s4", "--r", "2", "--k", "0.25", "--level", "2", "--out"])
        .arg(&dir)
        .env("CURVATURE_GAUGE_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let r = report(&dir);
    assert!(quantity(&r, "functional") < 1e-10);
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["status"] == "reported-only"));
}
