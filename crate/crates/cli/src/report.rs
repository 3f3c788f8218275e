use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::manifest::Kind;

pub const REPORT_SCHEMA: &str = "berkhyb.report/1";
pub const SUITE_REPORT_SCHEMA: &str = "berkhyb.suite-report/1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// One row of the long-format plot table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotRow {
    pub experiment: String,
    pub t: Option<f64>,
    pub series: String,
    pub value: f64,
}

/// What an experiment hands back before it is stamped into a report.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub result: serde_json::Value,
    pub plot: Vec<(Option<f64>, String, f64)>,
}

impl Outcome {
    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn point(&mut self, t: Option<f64>, series: impl Into<String>, value: f64) {
        self.plot.push((t, series.into(), value));
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub version: &'static str,
    pub name: String,
    pub kind: Kind,
    pub seed: u64,
    pub manifest: serde_json::Value,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub result: serde_json::Value,
    #[serde(skip)]
    pub plot: Vec<PlotRow>,
}

impl RunReport {
    pub fn new(name: &str, kind: Kind, seed: u64, manifest: serde_json::Value, outcome: Outcome) -> Self {
        let plot = outcome
            .plot
            .into_iter()
            .map(|(t, series, value)| PlotRow { experiment: name.to_string(), t, series, value })
            .collect();
        Self {
            schema: REPORT_SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            name: name.to_string(),
            kind,
            seed,
            manifest,
            passed: outcome.checks.iter().all(|c| c.passed),
            checks: outcome.checks,
            warnings: outcome.warnings,
            result: outcome.result,
            plot,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub kind: Kind,
    pub passed: bool,
    pub failed_checks: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema: &'static str,
    pub version: &'static str,
    pub name: String,
    pub seed: u64,
    pub passed: bool,
    pub runs: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn new(name: &str, seed: u64, reports: &[RunReport]) -> Self {
        let runs: Vec<SuiteEntry> = reports
            .iter()
            .map(|r| SuiteEntry {
                name: r.name.clone(),
                kind: r.kind,
                passed: r.passed,
                failed_checks: r.failed_checks().map(|c| c.name.clone()).collect(),
            })
            .collect();
        Self {
            schema: SUITE_REPORT_SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            name: name.to_string(),
            seed,
            passed: runs.iter().all(|r| r.passed),
            runs,
        }
    }
}

/// Long-format CSV: `experiment,t,series,value`; header only when `rows` is empty.
pub fn plot_csv(rows: &[PlotRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| HarnessError::input(Path::new("<plot>"), e.to_string());
    w.write_record(["experiment", "t", "series", "value"]).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::input(Path::new("<plot>"), e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| HarnessError::io(path, e))?;
    tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

/// `<dir>/<name>.json` and `<dir>/<name>.csv`.
pub fn emit_report(report: &RunReport, dir: &Path) -> Result<()> {
    write_atomic(&dir.join(format!("{}.json", report.name)), &report.to_json())?;
    write_atomic(&dir.join(format!("{}.csv", report.name)), &plot_csv(&report.plot)?)
}
