//! Verification reports and their JSON and CSV forms.
//!
//! Residuals and tolerances are rounded to 12 significant digits when a record
//! is built, so a parsed report compares equal to the emitted one. Non-finite
//! values are written as the strings `"inf"`, `"-inf"` and `"nan"`.

use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub const REPORT_VERSION: u32 = 1;

/// CSV header, in record field order.
pub const CSV_COLUMNS: [&str; 6] = ["id", "anchor", "residual", "tol", "pass", "ms"];

/// Rounds to 12 significant digits; non-finite values pass through.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

pub fn format_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        serde_json::to_string(&v).expect("finite float serializes")
    }
}

fn parse_num(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| Error::Parameter(format!("not a number: {s:?}"))),
    }
}

mod number {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&format_num(*v))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => parse_num(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// Environment block: the configured grid, parameters and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Env {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub eps: f64,
    pub lambda: f64,
    pub seed: u64,
}

/// Outcome of one check; `pass` is `residual < tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    #[serde(with = "number")]
    pub residual: f64,
    #[serde(with = "number")]
    pub tol: f64,
    pub pass: bool,
    pub ms: u64,
}

impl CheckRecord {
    pub fn new(id: &str, anchor: &str, residual: f64, tol: f64, ms: u64) -> Self {
        let (residual, tol) = (round12(residual), round12(tol));
        Self { id: id.into(), anchor: anchor.into(), residual, tol, pass: residual < tol, ms }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub env: Env,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect()
    }

    /// Every check has passed; vacuously true for an empty report.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Parameter(format!("unknown format {s:?} (expected json or csv)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Checks as CSV rows under [`CSV_COLUMNS`]; an empty report is header-only.
pub fn to_csv(checks: &[CheckRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for c in checks {
        w.write_record([c.id.clone(), c.anchor.clone(), format_num(c.residual), format_num(c.tol), c.pass.to_string(), c.ms.to_string()])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_csv(text: &str) -> Result<Vec<CheckRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Parameter(format!("unexpected CSV header {header:?}")));
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(csv_err)?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        out.push(CheckRecord {
            id: field(0).into(),
            anchor: field(1).into(),
            residual: parse_num(field(2))?,
            tol: parse_num(field(3))?,
            pass: field(4).parse().map_err(|_| Error::Parameter(format!("bad pass flag {:?}", field(4))))?,
            ms: field(5).parse().map_err(|_| Error::Parameter(format!("bad ms {:?}", field(5))))?,
        });
    }
    Ok(out)
}

pub fn to_json(report: &Report) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_json(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| Error::Parameter(format!("invalid report: {e}")))
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report).map(|s| s + "\n"),
        Format::Csv => to_csv(&report.checks),
    }
}

/// Writes the report; errors if the path cannot be written.
pub fn emit_report(report: &Report, path: &Path, format: Format) -> Result<()> {
    let text = render(report, format)?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Env {
        Env { d: 1, n: 15, l: 9.7, eps: 1.0, lambda: 1.0, seed: 7 }
    }

    fn sample() -> Report {
        Report {
            version: REPORT_VERSION,
            env: env(),
            checks: vec![
                CheckRecord::new("a", "first, with comma", 1.234567890123456e-11, 1e-9, 3),
                CheckRecord::new("b", "second", f64::INFINITY, 1e-9, 0),
                CheckRecord::new("c", "third \"quoted\"", 0.0, 0.0, 12),
            ],
        }
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(1.234567890123456e-11), 1.23456789012e-11);
        assert_eq!(round12(0.0), 0.0);
        assert!(round12(f64::NAN).is_nan());
    }

    #[test]
    fn strict_pass() {
        assert!(!CheckRecord::new("x", "y", 0.0, 0.0, 0).pass);
        assert!(CheckRecord::new("x", "y", 0.0, 1e-300, 0).pass);
        assert!(!CheckRecord::new("x", "y", f64::NAN, 1.0, 0).pass);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let text = to_json(&r).unwrap();
        assert!(text.contains("\"inf\""));
        assert_eq!(from_json(&text).unwrap(), r);
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let text = to_csv(&r.checks).unwrap();
        assert_eq!(from_csv(&text).unwrap(), r.checks);
    }

    #[test]
    fn empty_report_forms() {
        let r = Report { version: REPORT_VERSION, env: env(), checks: vec![] };
        assert_eq!(to_csv(&r.checks).unwrap(), "id,anchor,residual,tol,pass,ms\n");
        let v: serde_json::Value = serde_json::from_str(&to_json(&r).unwrap()).unwrap();
        assert_eq!(v["checks"], serde_json::json!([]));
        assert!(r.all_pass());
    }

    #[test]
    fn field_order_is_stable() {
        let text = serde_json::to_string(&sample()).unwrap();
        let pos = |k: &str| text.find(k).unwrap();
        assert!(pos("\"version\"") < pos("\"env\"") && pos("\"env\"") < pos("\"checks\""));
        assert!(pos("\"id\"") < pos("\"anchor\"") && pos("\"residual\"") < pos("\"tol\"") && pos("\"pass\"") < pos("\"ms\""));
    }

    #[test]
    fn unwritable_path() {
        let r = sample();
        assert!(matches!(emit_report(&r, Path::new("/nonexistent-dir/x.json"), Format::Json), Err(Error::Io(_))));
    }
}
