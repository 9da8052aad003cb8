//! Run reports: named checks against thresholds, CSV tables and the
//! artifact manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use super::config::RunConfig;
use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "=")]
    Equal,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            comparison: Comparison::Below,
            threshold,
            pass: value < threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            comparison: Comparison::AtLeast,
            threshold,
            pass: value >= threshold,
        }
    }

    /// A count that must be zero.
    pub fn none(name: &str, count: usize) -> Self {
        Check {
            name: name.into(),
            value: count as f64,
            comparison: Comparison::Equal,
            threshold: 0.0,
            pass: count == 0,
        }
    }

    /// A flag that must hold.
    pub fn holds(name: &str, flag: bool) -> Self {
        Self::at_least(name, if flag { 1.0 } else { 0.0 }, 1.0)
    }
}

/// A plot-ready table; cells are preformatted.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `r_1 .. r_m` column names.
pub fn coord_header(rank: usize) -> Vec<String> {
    (1..=rank).map(|i| format!("r{i}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub kind: &'static str,
    pub file: String,
    pub rows: Option<usize>,
}

/// Everything a task produces. The machine-readable part carries no timing,
/// so identical configurations give identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub summary: serde_json::Value,
    pub artifacts: Vec<Artifact>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl RunReport {
    pub fn new(config: RunConfig, checks: Vec<Check>, summary: serde_json::Value, tables: Vec<Table>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        RunReport {
            config,
            pass,
            checks,
            summary,
            artifacts: Vec::new(),
            tables,
            elapsed: Duration::ZERO,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "task     {}", c.task.name());
        let _ = writeln!(s, "space    {}", c.space);
        let _ = writeln!(s, "seed     {}", c.seed);
        let _ = writeln!(s, "elapsed  {:.3} s", self.elapsed.as_secs_f64());
        let _ = writeln!(s);
        for ch in &self.checks {
            let op = match ch.comparison {
                Comparison::Below => "<",
                Comparison::AtLeast => ">=",
                Comparison::Equal => "=",
            };
            let _ = writeln!(
                s,
                "{}  {:<32} {:>12.4e} {op:>2} {:.1e}",
                if ch.pass { "PASS" } else { "FAIL" },
                ch.name,
                ch.value,
                ch.threshold
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "overall  {}", if self.pass { "PASS" } else { "FAIL" });
        if !self.artifacts.is_empty() {
            let _ = writeln!(s);
            for a in &self.artifacts {
                let _ = writeln!(s, "wrote    {}", a.file);
            }
        }
        s
    }

    /// Writes the tables, the JSON report and the text summary into `dir`
    /// and fills in the artifact manifest.
    pub fn write(&mut self, dir: &Path) -> Result<(), CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |e: std::io::Error| CliError::Io { path, source: e }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let out = self.config.output.clone();
        self.artifacts.clear();
        for t in &self.tables {
            let file = format!("{}{}.csv", out.table_prefix, t.name);
            let path = dir.join(&file);
            let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Csv {
                path: path.clone(),
                source: e,
            })?;
            let csv_err = |e| CliError::Csv {
                path: path.clone(),
                source: e,
            };
            w.write_record(&t.header).map_err(csv_err)?;
            for row in &t.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush().map_err(io(&path))?;
            self.artifacts.push(Artifact {
                kind: "table",
                file,
                rows: Some(t.rows.len()),
            });
        }
        self.artifacts.push(Artifact {
            kind: "report",
            file: out.report.clone(),
            rows: None,
        });
        self.artifacts.push(Artifact {
            kind: "summary",
            file: out.summary.clone(),
            rows: None,
        });
        let report_path = dir.join(&out.report);
        fs::write(&report_path, self.to_json()).map_err(io(&report_path))?;
        let summary_path = dir.join(&out.summary);
        fs::write(&summary_path, self.to_text()).map_err(io(&summary_path))?;
        Ok(())
    }
}
