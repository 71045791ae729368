use magweyl::harness::report::{from_csv, from_json, render, to_csv};
use magweyl::harness::{emit_report, run_selected, run_suite, Format, SuiteConfig};

fn quick(cfg: &SuiteConfig) -> magweyl::harness::Report {
    run_selected(cfg, |d| matches!(d.suite, "grid" | "weyl" | "products" | "inequalities")).unwrap()
}

#[test]
fn seeded_runs_render_identically() {
    let cfg = SuiteConfig::default();
    let (a, b) = (quick(&cfg), quick(&cfg));
    let strip = |r: &magweyl::harness::Report| {
        let mut r = r.clone();
        r.checks.iter_mut().for_each(|c| c.ms = 0);
        render(&r, Format::Json).unwrap()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn seed_changes_random_checks() {
    let mut cfg = SuiteConfig::default();
    let a = quick(&cfg);
    cfg.seed += 1;
    let b = quick(&cfg);
    assert_ne!(a.get("quantize-inversion").unwrap().residual, b.get("quantize-inversion").unwrap().residual);
}

#[test]
fn zero_tolerances_fail_every_check() {
    let cfg = SuiteConfig::from_toml("[tolerances]\nall = 0.0\n").unwrap();
    let r = run_suite(&cfg).unwrap();
    assert!(!r.checks.is_empty());
    assert!(r.checks.iter().all(|c| !c.pass && c.tol == 0.0));
    assert_eq!(from_json(&render(&r, Format::Json).unwrap()).unwrap(), r);
    assert_eq!(from_csv(&to_csv(&r.checks).unwrap()).unwrap(), r.checks);
}

#[test]
fn specific_tolerance_beats_all() {
    let cfg = SuiteConfig::from_toml("suites = [\"grid\"]\n[tolerances]\nall = 0.0\nplancherel = 1.0\n").unwrap();
    let r = run_suite(&cfg).unwrap();
    assert!(!r.get("sfourier-involution").unwrap().pass);
    assert!(r.get("plancherel").unwrap().pass);
}

#[test]
fn report_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let r = quick(&SuiteConfig::default());
    let (json, csv) = (dir.path().join("r.json"), dir.path().join("r.csv"));
    emit_report(&r, &json, Format::Json).unwrap();
    emit_report(&r, &csv, Format::Csv).unwrap();
    assert_eq!(from_json(&std::fs::read_to_string(&json).unwrap()).unwrap(), r);
    assert_eq!(from_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap(), r.checks);
    assert!(emit_report(&r, &dir.path().join("missing/r.json"), Format::Json).is_err());
}

#[test]
fn configured_symbols_and_gauge_enter_the_checks() {
    let text = r#"
suites = ["weyl", "supercalc"]
[grid]
d = 1
n = 9
L = 7.5
[potential]
family = "landau"
d = 1
b = 0.3
[gauge]
chi = [{ coef = 0.2, pow = [2] }]
[[symbols]]
name = "bump"
family = "gaussian"
center = [0.1]
momentum = [0.0]
width = 1.0
[[symbols]]
name = "flow"
family = "liouville"
h = "bump"
"#;
    let cfg = SuiteConfig::from_toml(text).unwrap();
    let r = run_suite(&cfg).unwrap();
    assert_eq!(r.env.n, 9);
    let bad: Vec<&str> = r.failures();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(SuiteConfig::from_toml("suites = [\"nope\"]").is_err());
    assert!(SuiteConfig::from_toml("[tolerances]\nnot-a-check = 1.0").is_err());
    assert!(SuiteConfig::from_toml("eps = 0.0").is_err());
    assert!(SuiteConfig::from_toml("unknown = 1").is_err());
}

#[test]
fn shipped_configs_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let default = SuiteConfig::load(&dir.join("default.toml")).unwrap();
    assert_eq!(default, SuiteConfig::default());
    let closed = SuiteConfig::load(&dir.join("closed-forms.toml")).unwrap();
    assert_eq!(closed.suites, ["closed-forms"]);
}
