//! CSV tables, pass/fail checks and the JSON summary.

use std::fs;
use std::path::{Path, PathBuf};

use homspec_core::SlopeFit;
use serde::Serialize;

use crate::error::{ExperimentError, Result};

/// A rectangular table written as one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Column index by header name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// One asserted invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeEntry {
    pub label: String,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    pub points: usize,
    pub exact: bool,
}

impl SlopeEntry {
    pub fn new(label: impl Into<String>, fit: Option<SlopeFit>) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        match fit {
            Some(f) => SlopeEntry {
                label: label.into(),
                slope: finite(f.slope),
                intercept: finite(f.intercept),
                residual: finite(f.residual),
                points: f.points,
                exact: f.exact,
            },
            None => SlopeEntry { label: label.into(), slope: None, intercept: None, residual: None, points: 0, exact: false },
        }
    }
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub tables: Vec<Table>,
    pub slopes: Vec<SlopeEntry>,
    pub checks: Vec<Check>,
    /// Command-specific values for the JSON summary.
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            tables: Vec::new(),
            slopes: Vec::new(),
            checks: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    config_id: &'a str,
    command: &'a str,
    version: &'a str,
    seed: u64,
    threads: usize,
    passed: bool,
    slopes: &'a [SlopeEntry],
    checks: &'a [Check],
    details: &'a serde_json::Value,
    config: &'a crate::config::ExperimentConfig,
}

/// Formats a float with the shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Writes one table; an empty table is an error and creates no file.
pub fn write_table(dir: &Path, table: &Table) -> Result<PathBuf> {
    if table.rows.is_empty() {
        return Err(ExperimentError::EmptyRecords(table.name.clone()));
    }
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(path)
}

/// Writes every table and `<command>_summary.json` into `dir`.
pub fn emit(dir: &Path, cfg: &crate::config::ExperimentConfig, threads: usize, report: &Report) -> Result<Vec<PathBuf>> {
    if let Some(empty) = report.tables.iter().find(|t| t.rows.is_empty()) {
        return Err(ExperimentError::EmptyRecords(empty.name.clone()));
    }
    let mut written = Vec::with_capacity(report.tables.len() + 1);
    for t in &report.tables {
        written.push(write_table(dir, t)?);
    }
    let summary = Summary {
        config_id: &cfg.id,
        command: &report.command,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        threads,
        passed: report.passed(),
        slopes: &report.slopes,
        checks: &report.checks,
        details: &report.details,
        config: cfg,
    };
    let path = dir.join(format!("{}_summary.json", report.command));
    fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("homspec-output-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn empty_table_creates_nothing() {
        let dir = scratch("empty");
        let t = Table::new("rates", &["a", "b"]);
        assert!(matches!(write_table(&dir, &t), Err(ExperimentError::EmptyRecords(_))));
        assert!(!dir.join("rates.csv").exists());
    }

    #[test]
    fn single_row_has_header() {
        let dir = scratch("single");
        let mut t = Table::new("rates", &["a", "b"]);
        t.push(vec![num(0.1), num(2.0)]);
        let path = write_table(&dir, &t).unwrap();
        assert_eq!(fs::read_to_string(path).unwrap(), "a,b\n0.1,2\n");
        fs::remove_dir_all(dir).unwrap();
    }
}
