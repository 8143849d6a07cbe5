//! Report rows, summaries and their CSV/JSON emission.

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};

use crate::config::SweepConfig;
use crate::error::Result;

/// CSV column names.
pub const HEADER: [&str; 8] = ["experiment", "sigma", "beta", "R", "quantity", "value", "bound", "pass"];

/// A measured value; `Flat` marks a fit on identically constant data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Number(f64),
    Flat,
}

/// Shortest round-trip text; exponent form outside `[1e−4, 1e15)`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(v) => f.write_str(&format_number(*v)),
            Value::Flat => f.write_str("flat"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Value {
    pub fn number(&self) -> Option<f64> {
        match *self {
            Value::Number(v) => Some(v),
            Value::Flat => None,
        }
    }
}

/// One line of the CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub sigma: f64,
    pub beta: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub quantity: String,
    pub value: Value,
    pub bound: Option<f64>,
    pub pass: bool,
}

impl Row {
    pub fn start(experiment: &str, sigma: f64, beta: f64, radius: f64, quantity: &str) -> RowBuilder {
        RowBuilder(Row {
            experiment: experiment.into(),
            sigma,
            beta,
            radius,
            quantity: quantity.into(),
            value: Value::Number(f64::NAN),
            bound: None,
            pass: false,
        })
    }

    fn record(&self) -> [String; 8] {
        [
            self.experiment.clone(),
            format_number(self.sigma),
            format_number(self.beta),
            format_number(self.radius),
            self.quantity.clone(),
            self.value.to_string(),
            self.bound.map(format_number).unwrap_or_default(),
            self.pass.to_string(),
        ]
    }
}

/// Fills in the measured part of a [`Row`].
pub struct RowBuilder(Row);

impl RowBuilder {
    /// `value ≤ bound`.
    pub fn at_most(self, value: f64, bound: f64) -> Row {
        self.finish(Value::Number(value), Some(bound), value <= bound)
    }

    /// `value ≥ bound`.
    pub fn at_least(self, value: f64, bound: f64) -> Row {
        self.finish(Value::Number(value), Some(bound), value >= bound)
    }

    /// A finite measurement with no bound.
    pub fn measured(self, value: f64) -> Row {
        self.finish(Value::Number(value), None, value.is_finite())
    }

    pub fn finish(mut self, value: Value, bound: Option<f64>, pass: bool) -> Row {
        self.0.value = value;
        self.0.bound = bound;
        self.0.pass = pass;
        self.0
    }

    /// A failed computation.
    pub fn failed(self) -> Row {
        self.finish(Value::Number(f64::NAN), None, false)
    }
}

/// Largest value of a constant over the `σ` sweep and its uniformity ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryEntry {
    pub experiment: String,
    pub quantity: String,
    #[serde(rename = "R")]
    pub radius: f64,
    pub max_over_sigma: f64,
    /// Value at the largest `σ` over the value at the smallest.
    pub uniformity_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<Row>,
    pub summary: Vec<SummaryEntry>,
}

impl SweepReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.summary.iter().all(|s| s.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn extend(&mut self, other: SweepReport) {
        self.rows.extend(other.rows);
        self.summary.extend(other.summary);
    }

    /// Rows whose experiment and quantity match.
    pub fn select<'a>(&'a self, experiment: &'a str, quantity: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.experiment == experiment && r.quantity == quantity)
    }

    /// CSV text of the rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER)?;
        for r in &self.rows {
            w.write_record(r.record())?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    all_pass: bool,
    rows: usize,
    failures: usize,
    summary: &'a [SummaryEntry],
    config: &'a SweepConfig,
}

/// Path of the metadata file written next to `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Writes the CSV to `path` and the metadata (config echo, version,
/// summary) to [`sidecar_path`].
pub fn emit(report: &SweepReport, config: &SweepConfig, command: &str, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, report.to_csv()?)?;
    let meta = Sidecar {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        all_pass: report.all_pass(),
        rows: report.rows.len(),
        failures: report.failures().count(),
        summary: &report.summary,
        config,
    };
    serde_json::to_writer_pretty(File::create(sidecar_path(path))?, &meta)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(SweepReport::default().to_csv().unwrap(), "experiment,sigma,beta,R,quantity,value,bound,pass\n");
    }

    #[test]
    fn one_row_gives_two_lines() {
        let mut r = SweepReport::default();
        r.rows.push(Row::start("holder:constant", 1.0, 0.0, 0.25, "alpha").finish(Value::Flat, None, true));
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().nth(1).unwrap(), "holder:constant,1,0,0.25,alpha,flat,,true");
        assert_eq!(csv, r.to_csv().unwrap());
    }

    #[test]
    fn extreme_magnitudes_use_exponents() {
        assert_eq!(format_number(1e-6), "1e-6");
        assert_eq!(format_number(2.5e20), "2.5e20");
        assert_eq!(format_number(0.125), "0.125");
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn emit_writes_csv_and_sidecar() {
        let dir = std::env::temp_dir().join(format!("nonlocal-emit-{}", std::process::id()));
        let path = dir.join("out.csv");
        let mut r = SweepReport::default();
        r.rows.push(Row::start("x", 1.5, -1.0, 0.1, "q").at_most(1.0, 2.0));
        emit(&r, &SweepConfig::default(), "test", &path).unwrap();
        let csv = std::fs::read_to_string(&path).unwrap();
        assert!(csv.ends_with("x,1.5,-1,0.1,q,1,2,true\n"));
        let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(meta["all_pass"], true);
        assert_eq!(meta["config"]["profile"]["sigmas"][0], 0.5);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
