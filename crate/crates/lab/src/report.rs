//! Bit-stable CSV and JSON emission.

use std::path::Path;

use dunkl_sim::Verdict;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;

pub const RESULT_HEADER: [&str; 12] = ["experiment", "system", "k", "c", "t", "x", "quantity", "estimate", "std_error", "bound", "margin", "pass"];

/// One line of `results.csv`; empty cells are `None`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub system: String,
    pub k: String,
    pub c: Option<f64>,
    pub t: Option<f64>,
    pub x: Option<Vec<f64>>,
    pub quantity: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub bound: Option<f64>,
    pub margin: Option<f64>,
    pub pass: Option<bool>,
}

/// Shortest round-trip decimal, switching to exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

pub fn fmt_site(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.system.clone(),
            self.k.clone(),
            opt(self.c),
            opt(self.t),
            self.x.as_deref().map(fmt_vec).unwrap_or_default(),
            self.quantity.clone(),
            fmt_f64(self.estimate),
            opt(self.std_error),
            opt(self.bound),
            opt(self.margin),
            self.pass.map(|p| p.to_string()).unwrap_or_default(),
        ]
    }
}

/// Writes a CSV table; an empty body still gets its header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let body: Vec<Vec<String>> = rows.iter().map(ResultRow::record).collect();
    write_table(path, &RESULT_HEADER, &body)
}

/// Status of one audited hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Warn,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    pub item: String,
    pub status: Status,
    pub detail: String,
}

impl Hypothesis {
    pub fn new(item: &str, status: Status, detail: impl Into<String>) -> Self {
        Self { item: item.into(), status, detail: detail.into() }
    }
}

/// Everything a run produces besides the tables.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    pub rows: Vec<ResultRow>,
    pub hypotheses: Vec<Hypothesis>,
    pub notes: Vec<String>,
    pub details: Value,
    /// Extra CSV files: name, header, rows.
    pub tables: Vec<(String, Vec<&'static str>, Vec<Vec<String>>)>,
    pub seeds: Value,
}

pub fn versions() -> Value {
    json!({
        "dunkl-core": dunkl_core::VERSION,
        "dunkl-lab": env!("CARGO_PKG_VERSION"),
        "dunkl-sim": dunkl_sim::VERSION,
    })
}

/// Summary document; `serde_json` maps keep keys sorted.
pub fn summary(experiment: &str, outcome: &Outcome, config: &Value, exit_code: i32) -> Value {
    let checked: Vec<&ResultRow> = outcome.rows.iter().filter(|r| r.pass.is_some()).collect();
    let min_margin = checked.iter().filter_map(|r| r.margin).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    json!({
        "config": config,
        "details": outcome.details,
        "exit_code": exit_code,
        "experiment": experiment,
        "hypotheses": outcome.hypotheses,
        "margins": {
            "min_margin": min_margin,
            "n_checks": checked.len(),
            "n_failed": checked.iter().filter(|r| r.pass == Some(false)).count(),
        },
        "notes": outcome.notes,
        "seeds": outcome.seeds,
        "verdict": outcome.verdict.as_str(),
        "versions": versions(),
    })
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| crate::error::LabError::Io(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_canonical() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(-1.5e-7), "-1.5e-7");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_vec(&[1.0, -2.25]), "1;-2.25");
        let v = 0.1 + 0.2;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn empty_table_keeps_its_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_results(&p, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), format!("{}\n", RESULT_HEADER.join(",")));
    }

    #[test]
    fn summary_keys_are_sorted() {
        let o = Outcome { verdict: Verdict::Pass, rows: vec![], hypotheses: vec![], notes: vec![], details: Value::Null, tables: vec![], seeds: json!({"seed": 1}) };
        let s = serde_json::to_string(&summary("x", &o, &json!({"b": 1, "a": 2}), 0)).unwrap();
        let keys = ["\"config\"", "\"details\"", "\"exit_code\"", "\"experiment\"", "\"hypotheses\"", "\"margins\""];
        let pos: Vec<usize> = keys.iter().map(|k| s.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
    }
}
