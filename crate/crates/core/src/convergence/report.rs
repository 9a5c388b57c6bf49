//! Experiment reports: one row per `(epsilon, statistic)`, CSV or JSON.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// `None` for rows that do not depend on epsilon (the ASEP reference).
    pub epsilon: Option<f64>,
    pub statistic: String,
    pub value: f64,
    pub radius: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Full configuration, including derived quantities, for replay.
    pub config: serde_json::Value,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<CheckResult>,
}

impl ConvergenceReport {
    pub fn new(config: serde_json::Value) -> Self {
        Self { config, rows: Vec::new(), checks: Vec::new() }
    }

    pub fn push(&mut self, epsilon: Option<f64>, statistic: &str, value: f64, radius: f64, samples: u64) {
        self.rows.push(ReportRow { epsilon, statistic: statistic.to_string(), value, radius, samples });
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult { name: name.to_string(), passed, detail });
    }

    pub fn rows_named<'a>(&'a self, statistic: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.statistic == statistic)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Configuration as `# key: value` comment lines, then the rows, then
    /// checks as trailing comments.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write_config_header(&self.config, &mut out)?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["epsilon", "statistic", "value", "radius", "samples"])?;
            for r in &self.rows {
                w.write_record([
                    r.epsilon.map_or(String::new(), |e| e.to_string()),
                    r.statistic.clone(),
                    format!("{:.10}", r.value),
                    format!("{:.10}", r.radius),
                    r.samples.to_string(),
                ])?;
            }
            w.flush()?;
        }
        for c in &self.checks {
            writeln!(out, "# check {}: {} ({})", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail)?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}

/// Writes `# key: value` lines for every top-level field of `config`.
pub fn write_config_header<W: Write>(config: &serde_json::Value, out: &mut W) -> Result<()> {
    match config.as_object() {
        Some(map) => {
            for (k, v) in map {
                writeln!(out, "# {k}: {v}")?;
            }
        }
        None => writeln!(out, "# config: {config}")?,
    }
    Ok(())
}
