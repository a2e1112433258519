// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tnslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tnslab")).args(args).output().expect("spawn tnslab")
}

fn tnslab_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tnslab"))
        .args(args)
        .env(key, value)
        .output()
        .expect("spawn tnslab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of a CSV as maps from header to field.
fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    rd.records()
        .map(|r| header.iter().cloned().zip(r.unwrap().iter().map(String::from)).collect())
        .collect()
}

#[test]
fn construct_w_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    let o = tnslab(&["construct", "--family", "w", "--n", "4", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["kind"], "state");
    let data = v["amplitudes"]["data"].as_array().unwrap();
    let nonzero: Vec<f64> = data
        .iter()
        .map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
        .filter(|&(re, im)| re != 0.0 || im != 0.0)
        .map(|(re, _)| re)
        .collect();
    assert_eq!(nonzero.len(), 4);
    assert!(nonzero.iter().all(|&x| (x - 0.5).abs() < 1e-15));
}

#[test]
fn construct_then_certify_every_family() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["--family", "w", "--n", "3"],
        &["--family", "psi_w", "--n", "4", "--eps", "0.2"],
        &["--family", "tau", "--n", "3"],
        &["--family", "w_obc", "--n", "5"],
        &["--family", "psi_w_timps", "--n", "4"],
        &["--family", "psi_tau", "--n", "3"],
        &["--family", "mu", "--n", "3"],
        &["--family", "aklt", "--n", "4"],
        &["--family", "random_obc", "--n", "4", "--m", "3", "--seed", "7"],
        &["--family", "ttns", "--n", "5", "--seed", "7"],
        &["--family", "mera", "--n", "8", "--seed", "7"],
        &["--family", "peps_loop"],
    ];
    for (k, case) in cases.iter().enumerate() {
        let out = dir.path().join(format!("a{}.json", k));
        let mut args = vec!["construct"];
        args.extend_from_slice(case);
        args.extend_from_slice(&["--out", path_str(&out)]);
        let o = tnslab(&args);
        assert_eq!(code(&o), 0, "{:?}: {}", case, String::from_utf8_lossy(&o.stderr));
        let c = tnslab(&["certify", "--input", path_str(&out)]);
        assert_eq!(code(&c), 0, "{:?}: {}", case, stdout(&c));
        let report: Value = serde_json::from_str(&stdout(&c)).unwrap();
        assert_eq!(report["pass"], true);
    }
}

#[test]
fn certify_reports_failed_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tau.json");
    assert_eq!(code(&tnslab(&["construct", "--family", "tau", "--n", "3", "--out", path_str(&out)])), 0);
    let c = tnslab(&["certify", "--input", path_str(&out), "--checks", "finite,norm"]);
    assert_eq!(code(&c), 2);
    let report: Value = serde_json::from_str(&stdout(&c)).unwrap();
    assert_eq!(report["checks"][0]["pass"], true);
    assert_eq!(report["checks"][1]["pass"], false);
    let wrong = tnslab(&["certify", "--input", path_str(&out), "--checks", "isometry"]);
    assert_eq!(code(&wrong), 2);
}

#[test]
fn injectivity_of_builtin_tensors() {
    let o = tnslab(&["injectivity", "--family", "aklt"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["wielandt_bound"], 56);
    assert_eq!(v["injectivity_length"], 2);
    assert_eq!(v["primitive"], true);
    let w = tnslab(&["injectivity", "--family", "psi_w", "--n", "5"]);
    let v: Value = serde_json::from_str(&stdout(&w)).unwrap();
    assert!(v["injectivity_length"].is_null());
}

#[test]
fn geometry_tau_row() {
    let o = tnslab(&["geometry", "--state", "tau", "--n", "3", "--m", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("state,N,m,predicted,measured,match\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["predicted"], "10");
    assert_eq!(rows[0]["measured"], "10");
    assert_eq!(rows[0]["match"], "true");
}

#[test]
fn sweep_matches_closed_forms() {
    let o = tnslab(&["sweep", "--family", "psi_w", "--n", "5", "--eps", "1e-1..1e-4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    let n = 5.0f64;
    let mut last_entry = 0.0;
    for (row, eps) in rows.iter().zip([1e-1, 1e-2, 1e-3, 1e-4]) {
        let e: f64 = row["eps"].parse().unwrap();
        assert_eq!(e, eps);
        let qn1 = (n * (eps * eps).ln_1p()).exp_m1();
        let overlap = n.sqrt() * eps / qn1.sqrt();
        let entry = (1.0 + eps * eps).sqrt() * qn1.powf(-1.0 / (2.0 * n));
        let got_ov: f64 = row["overlap"].parse().unwrap();
        let got_entry: f64 = row["max_abs_entry"].parse().unwrap();
        assert!((got_ov - overlap).abs() < 1e-12);
        assert!((got_entry - entry).abs() < 1e-10 * entry);
        assert!(got_entry > last_entry);
        last_entry = got_entry;
    }
}

#[test]
fn sweep_is_deterministic() {
    let args = ["sweep", "--family", "psi_tau", "--n", "3,4", "--eps", "0.5,0.1,0.3"];
    let a = stdout(&tnslab(&args));
    let b = stdout(&tnslab(&args));
    assert_eq!(a, b);
    let rows = csv_rows(&a);
    let keys: Vec<(String, String)> = rows.iter().map(|r| (r["N"].clone(), r["eps"].clone())).collect();
    let eps: Vec<f64> = keys.iter().take(3).map(|k| k.1.parse().unwrap()).collect();
    assert_eq!(eps, vec![0.5, 0.3, 0.1]);
    assert_eq!(keys[3].0, "4");
}

#[test]
fn optimize_trace_and_config_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"objective": "distance", "target": "random", "set": "obc", "N": 5, "m": 2, "budget": 3, "seed": 1}"#,
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let o = tnslab(&["optimize", "--config", path_str(&cfg), "--out", path_str(&a)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o2 = tnslab(&["optimize", "--config", path_str(&cfg), "--budget", "50", "--out", path_str(&b)]);
    assert_eq!(code(&o2), 0);
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    assert!(ta.starts_with("iteration,f,f_reg,overlap,max_abs_entry,frobenius_norms,transfer_product_norm,flag\n"));
    let ra = csv_rows(&ta);
    let rb = csv_rows(&tb);
    assert!(ra.len() <= 4);
    assert!(rb.len() > ra.len());
    assert_eq!(ra.last().unwrap()["flag"], "iteration_cap");
    assert!(["converged", "iteration_cap"].contains(&rb.last().unwrap()["flag"].as_str()));
    let norms: Vec<f64> = serde_json::from_str(&rb[0]["frobenius_norms"]).unwrap();
    assert_eq!(norms.len(), 5);
    for w in rb.windows(2) {
        let f0: f64 = w[0]["f_reg"].parse().unwrap();
        let f1: f64 = w[1]["f_reg"].parse().unwrap();
        assert!(f1 <= f0 + 1e-12);
    }
    let again = dir.path().join("c.csv");
    tnslab(&["optimize", "--config", path_str(&cfg), "--budget", "50", "--out", path_str(&again)]);
    assert_eq!(std::fs::read_to_string(&again).unwrap(), tb);
}

#[test]
fn schmidt_of_w_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    tnslab(&["construct", "--family", "w", "--n", "4", "--out", path_str(&out)]);
    let o = tnslab(&["schmidt", "--input", path_str(&out), "--cut", "2"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0]["rank"], "2");
    let c: Vec<f64> = serde_json::from_str(&rows[0]["coefficients"]).unwrap();
    assert!(c.iter().all(|&x| (x - 0.5f64.sqrt()).abs() < 1e-12));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&tnslab(&["frobnicate"])), 64);
    assert_eq!(code(&tnslab(&["construct", "--bogus"])), 64);
    assert_eq!(code(&tnslab(&["--help"])), 0);
    assert_eq!(code(&tnslab(&["construct", "--family", "nope", "--n", "3"])), 2);
    assert_eq!(code(&tnslab(&["construct", "--family", "w"])), 2);
    assert_eq!(code(&tnslab(&["geometry", "--state", "tau", "--n", "2"])), 2);
    assert_eq!(code(&tnslab(&["construct", "--family", "w", "--n", "40"])), 3);
    let small = tnslab_env(&["construct", "--family", "w", "--n", "10"], "TNS_CAPACITY_CAP", "512");
    assert_eq!(code(&small), 3);
    assert_eq!(code(&tnslab(&["certify", "--input", "/nonexistent/file.json"])), 1);
}
