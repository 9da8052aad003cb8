//! Batch front end: read a run configuration, execute one task and emit a
//! JSON report, a text summary and CSV tables.

pub mod config;
pub mod report;
mod tasks;

use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::catalog::{build_space, CatalogError};
use crate::complexcheck::ComplexError;
use crate::expr::ExprError;
use crate::radialops::RadialError;
use crate::solver::SolverError;

pub use config::{GridSpec, OutputSpec, ProfileSpec, RicciSpec, RunConfig, Sampling, Task, Tolerances};
pub use report::{Artifact, Check, Comparison, RunReport, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", .path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("expression: {0}")]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("task failed: {0}")]
    Task(String),
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub space: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(t) = self.task {
            cfg.task = t;
        }
        if let Some(s) = &self.space {
            cfg.space = s.clone();
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

/// Runs the configured task. Nothing is written; see [`RunReport::write`].
pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    config.validate()?;
    let start = Instant::now();
    let space = build_space(&config.space)?;
    log::info!("{} on {}", config.task.name(), space.name());
    let out = match config.task {
        Task::VerifyReduction => tasks::verify_reduction(config, &space)?,
        Task::VerifyLevy => tasks::verify_levy(config, &space)?,
        Task::Solve => tasks::solve(config, &space)?,
        Task::PrescribeRicci => tasks::prescribe(config, &space)?,
    };
    let mut report = RunReport::new(config.clone(), out.checks, out.summary, out.tables);
    report.elapsed = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests;
