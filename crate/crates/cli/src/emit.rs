//! Writes a report, given as its JSON document, as JSON, CSV and plot data.

use crate::CliError;
use iclab::{conc, measures, special, transports};
use serde_json::Value;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Json,
    Csv,
    Plot,
}

impl Format {
    pub fn parse_list(s: &str) -> Result<Vec<Format>, CliError> {
        let mut v = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let f = match part {
                "json" => Format::Json,
                "csv" => Format::Csv,
                "plot" => Format::Plot,
                _ => return Err(CliError::Usage(format!("unknown format '{part}'; use json, csv or plot"))),
            };
            if !v.contains(&f) {
                v.push(f);
            }
        }
        if v.is_empty() {
            return Err(CliError::Usage("empty --format list".into()));
        }
        v.sort();
        Ok(v)
    }
}

pub const CSV_HEADER: &[&str] = &[
    "check_id",
    "mode",
    "mandatory",
    "pass",
    "margin",
    "samples",
    "seed",
    "params",
    "estimates",
    "std_errors",
    "note",
    "config_hash",
];

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn json_bytes(report: &Value) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(report).expect("report serializes");
    b.push(b'\n');
    b
}

/// One row per check; checks that ended in an error get mode `error`.
pub fn csv_bytes(report: &Value) -> Result<Vec<u8>, CliError> {
    let fmt = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(fmt)?;
    let hash = cell(report.get("config_hash"));
    let empty = Vec::new();
    let list = |k: &str| report.get(k).and_then(Value::as_array).unwrap_or(&empty);
    for c in list("checks") {
        let row: Vec<String> = CSV_HEADER
            .iter()
            .map(|&k| match k {
                "check_id" => cell(c.get("id")),
                "config_hash" => hash.clone(),
                _ => cell(c.get(k)),
            })
            .collect();
        w.write_record(&row).map_err(fmt)?;
    }
    for e in list("errors") {
        let row: Vec<String> = CSV_HEADER
            .iter()
            .map(|&k| match k {
                "check_id" => cell(e.get("id")),
                "mode" => "error".into(),
                "pass" => "false".into(),
                "note" => format!("{}: {}", cell(e.get("kind")), cell(e.get("message"))),
                "config_hash" => hash.clone(),
                _ => String::new(),
            })
            .collect();
        w.write_record(&row).map_err(fmt)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
}

fn table(hash: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>, CliError> {
    let fmt = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    let mut out = format!("# config_hash={hash}\n").into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(fmt)?;
    for r in rows {
        w.write_record(r.iter().map(|x| x.to_string())).map_err(fmt)?;
    }
    out.extend(w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?);
    Ok(out)
}

fn lambda_star_rows() -> Vec<Vec<f64>> {
    (0..=400)
        .map(|i| {
            let x = -10.0 + 0.05 * i as f64;
            let m = (x * x).min(x.abs());
            vec![x, m / 5.0, measures::lambda_star_nu(x), m]
        })
        .collect()
}

fn f_pn_rows() -> Result<Vec<Vec<f64>>, iclab::Error> {
    let mut rows = Vec::new();
    for p in [1.0, 2.0, 5.0] {
        let g2 = 2.0 * special::ln_gamma(1.0 + 1.0 / p).exp();
        for n in [1usize, 8, 64] {
            for i in 0..=100 {
                let t = 0.05 * i as f64;
                let f = transports::f_pn(p, n, t)?;
                rows.push(vec![p, n as f64, t, (-t.powf(p) / n as f64).exp() * t / g2, f, t / g2]);
            }
        }
    }
    Ok(rows)
}

fn two_level_rows() -> Result<Vec<Vec<f64>>, iclab::Error> {
    let ts: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
    let mut rows = Vec::new();
    for n in [2usize, 8, 32] {
        for x in [-2.0, 0.0, 2.0] {
            for (t, lhs, rhs) in conc::two_level_curve(n, x, &ts)? {
                rows.push(vec![n as f64, x, t, lhs, rhs, lhs - rhs]);
            }
        }
    }
    Ok(rows)
}

/// Plot-data files: analytic curves for the checks present, plus margins.
pub fn plot_files(report: &Value) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let core = |e: iclab::Error| CliError::Usage(format!("plot data: {e}"));
    let hash = cell(report.get("config_hash"));
    let empty = Vec::new();
    let checks = report.get("checks").and_then(Value::as_array).unwrap_or(&empty);
    let has = |pred: &dyn Fn(&str) -> bool| {
        checks
            .iter()
            .any(|c| c.get("id").and_then(Value::as_str).is_some_and(pred))
    };
    let mut files = Vec::new();
    if has(&|id| id == "cramer_sandwich" || id == "lambda_nu_conjugate") {
        let b = table(&hash, &["x", "lower", "lambda_star", "upper"], &lambda_star_rows())?;
        files.push(("lambda_star_sandwich.csv".to_string(), b));
    }
    if has(&|id| id.starts_with("tbp_") || id == "f_pn_limit") {
        let b = table(&hash, &["p", "n", "t", "lower", "f_pn", "upper"], &f_pn_rows().map_err(core)?)?;
        files.push(("f_pn_brackets.csv".to_string(), b));
    }
    if has(&|id| id == "two_level_exp") {
        let rows = two_level_rows().map_err(core)?;
        let b = table(&hash, &["n", "x", "t", "enlarged_measure", "target", "margin"], &rows)?;
        files.push(("two_level_margin.csv".to_string(), b));
    }
    let fmt = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(format!("# config_hash={hash}\n").into_bytes());
    w.write_record(["check_id", "margin", "pass"]).map_err(fmt)?;
    for c in checks {
        w.write_record([cell(c.get("id")), cell(c.get("margin")), cell(c.get("pass"))])
            .map_err(fmt)?;
    }
    let b = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    files.push(("check_margins.csv".to_string(), b));
    Ok(files)
}

/// Writes the requested formats under `dir`; returns the paths written.
pub fn emit(report: &Value, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Json => {
                let p = dir.join("report.json");
                write_file(&p, &json_bytes(report))?;
                written.push(p);
            }
            Format::Csv => {
                let p = dir.join("report.csv");
                write_file(&p, &csv_bytes(report)?)?;
                written.push(p);
            }
            Format::Plot => {
                let pd = dir.join("plot");
                ensure_dir(&pd)?;
                for (name, b) in plot_files(report)? {
                    let p = pd.join(name);
                    write_file(&p, &b)?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}

/// Reads a report written by `emit`.
pub fn read_report(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::io(path, format!("not a report: {e}")))?;
    if v.get("tool").and_then(Value::as_str) != Some("iclab") || !v.get("checks").is_some_and(Value::is_array) {
        return Err(CliError::io(path, "not an iclab report"));
    }
    Ok(v)
}
