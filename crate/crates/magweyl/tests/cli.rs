use magweyl::harness::report::{from_csv, from_json};
use std::path::Path;
use std::process::{Command, Output};

fn magweyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magweyl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn suite_run_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "suites = [\"grid\", \"inequalities\"]\n");
    let out = dir.path().join("r.json");
    stdout(&magweyl(&["suite", "run", &cfg, "--seed", "7", "--out", out.to_str().unwrap()]));
    let r = from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.env.seed, 7);
    assert_eq!(r.checks.len(), 5);
    assert!(r.all_pass());

    let csv = stdout(&magweyl(&["suite", "run", &cfg, "--format", "csv"]));
    assert!(csv.starts_with("id,anchor,residual,tol,pass,ms\n"));
    assert_eq!(from_csv(&csv).unwrap().len(), 5);
}

#[test]
fn global_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "suites = [\"grid\"]\n");
    let r = json(&magweyl(&["suite", "run", &cfg, "--grid", "1,9,7.5", "--eps", "0.5", "--lambda", "0.25"]));
    assert_eq!(r["env"]["n"], 9);
    assert_eq!(r["env"]["L"], 7.5);
    assert_eq!(r["env"]["eps"], 0.5);
    assert_eq!(r["env"]["lambda"], 0.25);
}

#[test]
fn strict_run_reports_failures_by_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "suites = [\"grid\"]\n[tolerances]\nall = 0.0\n");
    let lax = magweyl(&["suite", "run", &cfg]);
    assert!(lax.status.success());
    assert!(String::from_utf8_lossy(&lax.stderr).contains("2 of 2 checks failed"));
    assert_eq!(magweyl(&["suite", "run", &cfg, "--strict"]).status.code(), Some(2));
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "suites = [\"nope\"]\n");
    let o = magweyl(&["suite", "run", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert!(!magweyl(&["suite", "run", "/nonexistent/c.toml"]).status.success());
    assert!(!magweyl(&["product", "--route", "nope"]).status.success());
    assert!(!magweyl(&["quantize", "--grid", "1,4"]).status.success());
    assert!(!magweyl(&["product", "--potential", "symmetric:1", "--grid", "1,5"]).status.success());
}

#[test]
fn product_routes_agree_through_the_cli() {
    let args = ["product", "--grid", "1,7", "--potential", "landau:0.6"];
    let a = json(&magweyl(&[&args[..], &["--route", "operator"]].concat()));
    let b = json(&magweyl(&[&args[..], &["--route", "quadrature"]].concat()));
    assert_eq!(a["columns"], serde_json::json!(["x1", "xi1", "re", "im"]));
    let rows = |v: &serde_json::Value| v["rows"].as_array().unwrap().clone();
    assert_eq!(rows(&a).len(), 49);
    for (ra, rb) in rows(&a).iter().zip(rows(&b)) {
        for k in 2..4 {
            assert!((ra[k].as_f64().unwrap() - rb[k].as_f64().unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn calculus_subcommands_emit_tables() {
    let q = json(&magweyl(&["quantize", "--grid", "1,5"]));
    assert_eq!(q["rows"].as_array().unwrap().len(), 25);
    let s = stdout(&magweyl(&["semisuper", "--grid", "1,5", "--format", "csv", "--eps", "1", "--route", "direct-quadrature"]));
    assert!(s.starts_with("x1,xi1,re,im\n"));
    assert_eq!(s.lines().count(), 26);
    let p = json(&magweyl(&["superproduct", "--grid", "1,3", "--route", "kernel"]));
    assert_eq!(p["columns"].as_array().unwrap().len(), 6);
    assert_eq!(p["rows"].as_array().unwrap().len(), 81);
    let l = json(&magweyl(&["liouville", "--grid", "2,3,5", "--potential", "symmetric:0.5", "--f", "0.1,0.2,0.3,0.4,1.0"]));
    assert_eq!(l["columns"].as_array().unwrap().len(), 10);
}

#[test]
fn expand_reports_second_order_ratios() {
    let e = json(&magweyl(&["expand", "--grid", "1,31", "--potential", "zero", "--f", "0.3,-0.2,1.2", "--g", "-0.4,0.3,1.0"]));
    let rows = e["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][2], "nan");
    for r in &rows[1..] {
        assert!((r[2].as_f64().unwrap() - 4.0).abs() < 0.4, "{r:?}");
    }
}

#[test]
fn report_convert_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "suites = [\"inequalities\"]\n");
    let j = dir.path().join("r.json");
    let c = dir.path().join("r.csv");
    let back = dir.path().join("back.json");
    stdout(&magweyl(&["suite", "run", &cfg, "--out", j.to_str().unwrap()]));
    stdout(&magweyl(&["report", "convert", j.to_str().unwrap(), "--format", "csv", "--out", c.to_str().unwrap()]));
    stdout(&magweyl(&["report", "convert", c.to_str().unwrap(), "--out", back.to_str().unwrap()]));
    let a = from_json(&std::fs::read_to_string(&j).unwrap()).unwrap();
    let b = from_json(&std::fs::read_to_string(&back).unwrap()).unwrap();
    assert_eq!(a, b);
}
