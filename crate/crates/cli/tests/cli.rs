use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hypgaf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypgaf"))
        .args(args)
        .env_remove("HYPGAF_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "exit {:?}, stderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_coeffs(path: &Path, coeffs: &[(f64, f64)]) {
    let mut s = String::from("n,re,im\n");
    for (n, (re, im)) in coeffs.iter().enumerate() {
        s.push_str(&format!("{n},{re},{im}\n"));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = hypgaf(&["sample", "--L", "1", "--r", "0.9", "--seed", "7", "--out", path_str(p)]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sample");
    assert_eq!(manifest["seed"], 7);
    assert!(manifest["started"].is_string() && manifest["finished"].is_string());
    assert!(manifest["tool_version"].is_string());
}

#[test]
fn sample_row_count_follows_tail_rule() {
    // At L = 1 every a_n^2 is 1, so the omitted variance after degree N is
    // r^{2(N+1)} / (1 - r^2) and the budget is eps / (1 - r^2).
    let (r, eps) = (0.9f64, 1e-12f64);
    let mut n = 0i32;
    while r.powi(2 * (n + 1)) > eps {
        n += 1;
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = hypgaf(&["sample", "--L", "1", "--r", "0.9", "--out", path_str(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,re,im"));
    assert_eq!(lines.count(), n as usize + 1);
}

#[test]
fn radius_one_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = hypgaf(&["sample", "--L", "1", "--r", "1.0", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "usage");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = hypgaf(&["rate", "--alpha", "1", "--x", "0", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["exit_code"], 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("s.csv");
    let o = hypgaf(&["sample", "--L", "1", "--r", "0.5", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"]["kind"], "io");
}

#[test]
fn count_constant_has_no_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.csv");
    write_coeffs(&p, &[(2.0, -1.0)]);
    let v = stdout_json(&hypgaf(&["count", "--in", path_str(&p), "--r", "0.7"]));
    assert_eq!(v["count"], 0);
    assert_eq!(v["agreement"], true);
}

#[test]
fn count_monomial_degree() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    let mut c = vec![(0.0, 0.0); 7];
    c[6] = (1.0, 0.0);
    write_coeffs(&p, &c);
    for method in ["winding", "roots", "both"] {
        let v = stdout_json(&hypgaf(&["count", "--in", path_str(&p), "--r", "0.5", "--method", method]));
        assert_eq!(v["count"], 6, "{method}");
    }
}

#[test]
fn count_random_sample_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.csv");
    let o = hypgaf(&["sample", "--L", "1", "--r", "0.95", "--seed", "11", "--out", path_str(&p)]);
    assert!(o.status.success());
    let v = stdout_json(&hypgaf(&["count", "--in", path_str(&p), "--r", "0.8"]));
    assert_eq!(v["agreement"], true);
    assert_eq!(v["diagnostics"]["winding"]["count"], v["diagnostics"]["roots"]["count"]);
    // the sidecar restores the truncation tail
    assert!(v["diagnostics"]["tail_amplitude"].as_f64().unwrap() > 0.0);

    let fresh = stdout_json(&hypgaf(&["count", "--L", "1", "--sample-r", "0.95", "--seed", "11", "--r", "0.8"]));
    assert_eq!(fresh["count"], v["count"]);
}

#[test]
fn count_beyond_sample_radius_is_rejected() {
    let o = hypgaf(&["count", "--L", "1", "--sample-r", "0.5", "--r", "0.6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rate_anchors() {
    let v = stdout_json(&hypgaf(&["rate", "--alpha", "1", "--x", "-2"]));
    let pi2_3 = std::f64::consts::PI.powi(2) / 3.0;
    assert!((v["value"].as_f64().unwrap() - pi2_3).abs() < 1e-12);
    assert_eq!(v["branch"], "BranchPoint");

    let v = stdout_json(&hypgaf(&["rate", "--alpha", "2", "--t", "2"]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-15);

    let v = stdout_json(&hypgaf(&["rate", "--alpha", "1", "--x", "1", "--numeric-check"]));
    assert!(v["difference"].as_f64().unwrap().abs() <= 1e-8);
}

#[test]
fn rate_reports_infinite_values() {
    let v = stdout_json(&hypgaf(&["rate", "--alpha", "2", "--x", "-1"]));
    assert!(v["value"].is_null());
    assert_eq!(v["infinite"], true);
}

#[test]
fn rate_numbers_carry_seventeen_digits() {
    let o = hypgaf(&["rate", "--alpha", "1", "--x", "-2"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("3.2898681336964528e+0"), "{text}");
}

#[test]
fn dist_pmf_matches_product_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = hypgaf(&["dist", "--r", "0.1", "--out", path_str(&out)]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["k", "prob"]);
    let probs: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    // the truncated law sits within its TV budget of the infinite product
    let p0: f64 = (1..200).map(|k| 1.0 - 0.01f64.powi(k)).product();
    assert!((probs[0] - p0).abs() <= 1e-12);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.csv.manifest.json")).unwrap()).unwrap();
    let mean = m["results"]["moments"]["mean"].as_f64().unwrap();
    assert!((mean - 0.01 / 0.99).abs() < 1e-12);
}

#[test]
fn tail_exact_requires_unit_intensity() {
    let o = hypgaf(&["tail", "--L", "2", "--r", "0.5", "--V", "3", "--method", "exact"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tail_methods_and_seeds() {
    let exact = stdout_json(&hypgaf(&["tail", "--r", "0.8", "--V", "4", "--method", "exact"]));
    assert_eq!(exact["method"], "ExactDP");
    let p = exact["p_hat"].as_f64().unwrap();

    let args = ["tail", "--r", "0.8", "--V", "4", "--method", "mc", "--trials", "2000", "--seed", "5"];
    let a = stdout_json(&hypgaf(&args));
    let b = stdout_json(&Command::new(env!("CARGO_BIN_EXE_hypgaf")).args(args).env("HYPGAF_THREADS", "1").output().unwrap());
    assert_eq!(a["p_hat"], b["p_hat"]);
    assert!(a["ci_low"].as_f64().unwrap() <= p && p <= a["ci_high"].as_f64().unwrap());

    let t = stdout_json(&hypgaf(&["tail", "--r", "0.8", "--V", "8", "--method", "tilted", "--trials", "20000", "--seed", "2"]));
    assert!(t["tilt"].as_f64().unwrap() > 0.0);
    let exact8 = stdout_json(&hypgaf(&["tail", "--r", "0.8", "--V", "8", "--method", "exact"]));
    let (ph, se) = (t["p_hat"].as_f64().unwrap(), t["stderr"].as_f64().unwrap());
    assert!((ph - exact8["p_hat"].as_f64().unwrap()).abs() < 5.0 * se);
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn experiment_tables() {
    let dir = tempfile::tempdir().unwrap();

    let out = dir.path().join("dev.csv");
    let o = hypgaf(&["experiment", "--name", "deviation", "--alpha", "1", "--t", "1", "--j-max", "4", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_table(&out);
    assert_eq!(h, ["j", "r", "mu", "v1", "upper_threshold", "lower_threshold", "log_p", "log_err", "ratio"]);
    assert_eq!(rows.len(), 4);
    assert!(dir.path().join("dev.csv.manifest.json").exists());

    let out = dir.path().join("oc.csv");
    let o = hypgaf(&["experiment", "--name", "overcrowding", "--r", "0.5,0.75", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_table(&out);
    assert_eq!(h, ["r", "v", "neg_log_p", "log_err", "normalized", "admissible"]);
    assert_eq!(rows.len(), 2);

    let out = dir.path().join("cert.csv");
    let o = hypgaf(&["experiment", "--name", "certificate", "--r", "0.5", "--m", "10,20", "--seed", "1", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_table(&out);
    assert_eq!(rows[0][6], "10");
    assert_eq!(rows[1][6], "20");

    let out = dir.path().join("mom.csv");
    let o = hypgaf(&["experiment", "--name", "moments", "--r", "0.5", "--trials", "200", "--seed", "4", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_table(&out);
    assert_eq!(h[3], "mean");
    assert_eq!(rows[0][2], "200");
}

#[test]
fn experiment_without_radii_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = hypgaf(&["experiment", "--name", "moments", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
}
