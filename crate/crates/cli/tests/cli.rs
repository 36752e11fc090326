use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn modcap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modcap"))
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .current_dir(dir)
        .env_remove("MODMETRIC_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Number following `key` on the first stdout line starting with it.
fn value_after(o: &Output, key: &str) -> f64 {
    let text = stdout(o);
    let line = text
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no {key:?} line in {text}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

fn disk(dir: &Path, cells: usize) -> String {
    let text = format!(
        r#"{{"dim": 2, "grid": {{"origin": [-1.1, -1.1], "extent": [2.2, 2.2], "cells": [{cells}, {cells}]}},
            "shapes": [{{"op": "union", "type": "ball", "center": [0, 0], "radius": 1}}]}}"#
    );
    let path = dir.join(format!("disk{cells}.json"));
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    while (a - b).abs() > 1e-15 * a {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    a
}

/// `2 pi / mu(r)` with `mu(r) = (pi/2) K(r') / K(r)` and `K(k) = pi / (2 agm(1, k'))`.
fn grotzsch_oracle(r: f64) -> f64 {
    let rp = (1.0 - r * r).sqrt();
    let mu = 0.5 * PI * agm(1.0, rp) / agm(1.0, r);
    2.0 * PI / mu
}

const LEAN: [&str; 4] = ["--control-points", "2", "--restarts", "0"];

#[test]
fn ring_capacity_and_field_export() {
    let tmp = TempDir::new().unwrap();
    let d = disk(tmp.path(), 129);
    let o = modcap(tmp.path(), &["capacity", "--domain", &d, "--k-ball", "0,0,0.5", "--export-field"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let oracle = 2.0 * PI / 2f64.ln();
    let value = value_after(&o, "capacity");
    assert!((value - oracle).abs() < 0.03 * oracle, "{value} vs {oracle}");

    let out = tmp.path().join("out");
    let vtk = std::fs::read_to_string(out.join("potential.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
    assert!(vtk.contains("DIMENSIONS 129 129 1"));
    let rec = read_json(&out.join("capacity.json"));
    assert!((rec["value"].as_f64().unwrap() - value).abs() < 1e-9 * value);
    assert_eq!(rec["n"], 2);
    assert_eq!(rec["config"]["command"], "capacity");
    assert_eq!(rec["config"]["domain"]["grid"]["cells"][0], 129);
    assert!(std::fs::read_to_string(out.join("potential.csv")).unwrap().starts_with("# config: "));
}

#[test]
fn missing_config_and_bad_arguments_exit_2() {
    let tmp = TempDir::new().unwrap();
    let o = modcap(tmp.path(), &["capacity", "--domain", "missing.json", "--k-ball", "0,0,0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let d = disk(tmp.path(), 17);
    let o = modcap(tmp.path(), &["capacity", "--domain", &d, "--k-ball", "0,0,0.5", "-n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = modcap(tmp.path(), &["capacity", "--domain", &d]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    let d = disk(tmp.path(), 33);
    let o = modcap(
        tmp.path(),
        &["capacity", "--domain", &d, "--k-ball", "0,0,0.5", "-n", "3", "--max-iters", "1"],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn grotzsch_metric_value_and_determinism() {
    let tmp = TempDir::new().unwrap();
    let d = disk(tmp.path(), 65);
    let args = ["metric", "--domain", &d, "--x", "0,0", "--y", "0.5,0", "--seed", "7"];
    let o = modcap(tmp.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let oracle = grotzsch_oracle(0.5);
    let value = value_after(&o, "mu");
    assert!((value - oracle).abs() < 0.05 * oracle, "{value} vs {oracle}");
    let first = std::fs::read_to_string(tmp.path().join("out/metric.json")).unwrap();
    let rec: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(rec["config"]["opt"]["seed"], 7);
    assert!(rec["vertices"].as_array().unwrap().len() >= 2);

    let again = modcap(tmp.path(), &args);
    assert!(again.status.success());
    let second = std::fs::read_to_string(tmp.path().join("out/metric.json")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn metric_point_outside_exits_2() {
    let tmp = TempDir::new().unwrap();
    let d = disk(tmp.path(), 33);
    let o = modcap(tmp.path(), &["metric", "--domain", &d, "--x", "1.05,0", "--y", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn centred_sphere_is_round_and_trend_is_reported() {
    let tmp = TempDir::new().unwrap();
    // the metric jumps by a few percent per cell on coarser grids, which
    // quantizes the radius differently along axes and diagonals
    let d = disk(tmp.path(), 129);
    let level = format!("{}", grotzsch_oracle(0.6));
    let mut args = vec!["sphere", "--domain", &d, "--x0", "0,0", "--level", &level, "--directions", "8"];
    args.extend(LEAN);
    let o = modcap(tmp.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let ratio = value_after(&o, &format!("level {:.6} roundness", grotzsch_oracle(0.6)));
    assert!(ratio < 1.05, "{ratio}");
    let csv = std::fs::read_to_string(tmp.path().join("out/sphere.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 8);

    args.extend(["--levels", "3"]);
    args[8] = "4";
    let o = modcap(tmp.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("trend:"), "{}", stdout(&o));
    assert_eq!(read_json(&tmp.path().join("out/sphere.json"))["ratios"].as_array().unwrap().len(), 3);
}

#[test]
fn sphere_level_too_large_exits_2() {
    let tmp = TempDir::new().unwrap();
    let d = disk(tmp.path(), 33);
    let mut args = vec!["sphere", "--domain", &d, "--x0", "0,0", "--level", "1000", "--directions", "4"];
    args.extend(LEAN);
    let o = modcap(tmp.path(), &args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("level escapes safe region"), "{}", stderr(&o));
}

#[test]
fn polarization_does_not_raise_capacity() {
    let tmp = TempDir::new().unwrap();
    let d = disk(tmp.path(), 65);
    let pts = tmp.path().join("k.txt");
    std::fs::write(&pts, "0.5,0.1;0.1,0.5;-0.2,0.3").unwrap();
    let o = modcap(
        tmp.path(),
        &["polarize", "--domain", &d, "--k-points", pts.to_str().unwrap(), "--sphere", "0.1,0.1,0.3", "--capacity"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = read_json(&tmp.path().join("out/polarize.json"));
    let before = rec["capacity_before"].as_f64().unwrap();
    let after = rec["capacity_after"].as_f64().unwrap();
    assert!(after <= before * 1.02, "{after} > {before}");
    let csv = std::fs::read_to_string(tmp.path().join("out/polarized.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "start,end"));

    // the polarized mask feeds back in as K
    let o = modcap(
        tmp.path(),
        &["capacity", "--domain", &d, "--k-rle", tmp.path().join("out/polarized.csv").to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((value_after(&o, "capacity") - after).abs() < 1e-9 * after);
}

#[test]
fn three_spheres_endpoints() {
    let tmp = TempDir::new().unwrap();
    let o = modcap(tmp.path(), &["three-spheres", "--k", "0.5", "--theta", "0"]);
    assert!(o.status.success());
    assert!((value_after(&o, "radius") - 1.0).abs() < 1e-10);
    let pi = format!("{}", PI);
    let o = modcap(tmp.path(), &["three-spheres", "--k", "0.5", "--theta", &pi]);
    assert!(o.status.success());
    assert!((value_after(&o, "radius") - 0.5f64.sqrt()).abs() < 1e-10);
    let o = modcap(tmp.path(), &["three-spheres", "--k", "1.5", "--theta", "0"]);
    assert_eq!(o.status.code(), Some(2));

    // explicit points: x1 on S(x0, 2), x2 on S(x0, 1), in space
    let o = modcap(
        tmp.path(),
        &["three-spheres", "--k", "0.5", "--x0", "1,1,1", "--r", "2", "--x1", "3,1,1", "--x2", "1,2,1"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("branch"));
}

#[test]
fn verify_reports_and_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let started = std::time::Instant::now();
    let o = modcap(tmp.path(), &["verify", "three-spheres"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(started.elapsed().as_secs_f64() < 5.0);
    let rep = read_json(&tmp.path().join("out/report_three-spheres.json"));
    assert_eq!(rep["failed"], 0);
    assert_eq!(rep["config"]["cases"], 50);

    let o = modcap(tmp.path(), &["verify", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    let o = modcap(tmp.path(), &["verify", "three-spheres", "--grid", "huge"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_all_small_aggregates() {
    let tmp = TempDir::new().unwrap();
    let o = modcap(tmp.path(), &["verify", "all", "--grid", "small", "--seed", "3"]);
    let summary = read_json(&tmp.path().join("out/verify.json"));
    let suites = summary["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 7);
    assert!(suites.iter().all(|s| s["config"]["seed"] == 3));
    let all_pass = suites.iter().all(|s| s["pass"] == true);
    assert_eq!(summary["pass"], all_pass);
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
}

#[test]
fn convergence_small_with_job_cap() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_modcap"))
        .args(["--out", "out", "convergence", "--grid", "small"])
        .current_dir(tmp.path())
        .env("MODMETRIC_JOBS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let rep = read_json(&tmp.path().join("out/report_convergence.json"));
    assert!(rep["stats"]["observed_order"].as_f64().unwrap() > 0.5);
}
