//! Run configuration: a single TOML document, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::radialops::MetricProfile;
use crate::solver::{RicciDensity, SolverConfig};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    VerifyReduction,
    VerifyLevy,
    Solve,
    PrescribeRicci,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::VerifyReduction => "verify-reduction",
            Task::VerifyLevy => "verify-levy",
            Task::Solve => "solve",
            Task::PrescribeRicci => "prescribe-ricci",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "verify-reduction" => Ok(Task::VerifyReduction),
            "verify-levy" => Ok(Task::VerifyLevy),
            "solve" => Ok(Task::Solve),
            "prescribe-ricci" => Ok(Task::PrescribeRicci),
            _ => Err(format!(
                "unknown task '{s}' (expected verify-reduction, verify-levy, solve or prescribe-ricci)"
            )),
        }
    }
}

/// `profile = "flat"`, `profile = "hyperbolic"` or
/// `profile = { custom = { f = "...", df = "..." } }` with expressions in `z`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Flat,
    #[default]
    Hyperbolic,
    Custom { f: String, df: String },
}

impl ProfileSpec {
    pub fn build(&self) -> Result<MetricProfile, CliError> {
        Ok(match self {
            ProfileSpec::Flat => MetricProfile::Flat,
            ProfileSpec::Hyperbolic => MetricProfile::Hyperbolic,
            ProfileSpec::Custom { f, df } => MetricProfile::custom(f, df)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub radius: f64,
    pub nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { radius: 1.0, nodes: 65 }
    }
}

/// Pass thresholds of the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative deviation `|M - oracle| / (1 + |oracle|)`.
    pub reduction: f64,
    pub flat_factor: f64,
    /// Verdicts closer to zero than this are not counted as disagreements.
    pub convexity_margin: f64,
    pub levy: f64,
    pub levy_order: f64,
    /// Relative spread of `det Lw / M_g(w)` at a base point.
    pub ratio_spread: f64,
    pub ricci: f64,
    pub reflection: f64,
    /// Rank one: sup distance between the grid solution and the quadrature
    /// solution with the same boundary value.
    pub ode_agreement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            reduction: 1e-6,
            flat_factor: 1e-12,
            convexity_margin: 1e-8,
            levy: 1e-6,
            levy_order: 1.9,
            ratio_spread: 1e-5,
            ricci: 1e-4,
            reflection: 1e-12,
            ode_agreement: 1e-5,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), CliError> {
        let all = [
            ("reduction", self.reduction),
            ("flat_factor", self.flat_factor),
            ("convexity_margin", self.convexity_margin),
            ("levy", self.levy),
            ("levy_order", self.levy_order),
            ("ratio_spread", self.ratio_spread),
            ("ricci", self.ricci),
            ("reflection", self.reflection),
            ("ode_agreement", self.ode_agreement),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Sample sizes of the verification tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    /// Random test functions for the factorization check.
    pub functions: usize,
    /// Chamber points per test function.
    pub points: usize,
    pub flat_points: usize,
    pub convexity_samples: usize,
    pub levy_functions: usize,
    pub levy_points: usize,
    /// Coarsest step and number of halvings of the Levy convergence study.
    pub levy_coarse_step: f64,
    pub levy_levels: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            functions: 50,
            points: 20,
            flat_points: 1000,
            convexity_samples: 500,
            levy_functions: 5,
            levy_points: 5,
            levy_coarse_step: 4e-2,
            levy_levels: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RicciSpec {
    pub density: RicciDensity,
    pub fit_degree: usize,
}

impl Default for RicciSpec {
    fn default() -> Self {
        RicciSpec {
            density: RicciDensity::VolumeCorrected,
            fit_degree: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Machine-readable report.
    pub report: String,
    /// Human-readable summary.
    pub summary: String,
    /// Prefix of the CSV tables.
    pub table_prefix: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            report: "report.json".into(),
            summary: "summary.txt".into(),
            table_prefix: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub space: String,
    #[serde(default)]
    pub profile: ProfileSpec,
    /// Density `f` of the `solve` task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    /// Prescribed `h` of the `prescribe-ricci` task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub ricci: RicciSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml(&src).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks everything that does not need the space.
    pub fn validate(&self) -> Result<(), CliError> {
        self.tolerances.validate()?;
        self.solver
            .validate()
            .map_err(|e| CliError::Config(format!("solver: {e}")))?;
        if !(self.grid.radius > 0.0 && self.grid.radius.is_finite()) || self.grid.nodes < 3 {
            return Err(CliError::Config(format!(
                "grid needs radius > 0 and nodes >= 3, got {:?}",
                self.grid
            )));
        }
        let s = &self.sampling;
        if s.functions == 0 || s.points == 0 || s.levy_functions == 0 || s.levy_points == 0 || s.levy_levels < 2 {
            return Err(CliError::Config(
                "sampling sizes must be positive and levy_levels >= 2".into(),
            ));
        }
        if !(s.levy_coarse_step > 0.0 && s.levy_coarse_step < 1.0) {
            return Err(CliError::Config(format!(
                "sampling.levy_coarse_step must lie in (0, 1), got {}",
                s.levy_coarse_step
            )));
        }
        match self.task {
            Task::Solve if self.density.is_none() => {
                return Err(CliError::Config("task 'solve' needs 'density'".into()));
            }
            Task::PrescribeRicci if self.h.is_none() => {
                return Err(CliError::Config("task 'prescribe-ricci' needs 'h'".into()));
            }
            Task::VerifyLevy | Task::PrescribeRicci if self.profile != ProfileSpec::Hyperbolic => {
                return Err(CliError::Config(format!(
                    "task '{}' works with the Killing metric of the dual; profile must be 'hyperbolic'",
                    self.task.name()
                )));
            }
            _ => {}
        }
        Ok(())
    }
}
