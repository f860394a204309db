//! Study configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::assembly::{QuadratureSettings, DEFAULT_SIGMA0};
use crate::error::{Error, Result};
use crate::solver::{Preconditioner, SolverMethod, SolverSettings};
use crate::space::ConstraintMode;
use crate::topology::DEFAULT_RATIO_THRESHOLD;

use super::domains::{builtin_template, load_geometry, DomainTemplate};
use super::solutions::SolutionId;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// Name of a built-in domain.
    pub builtin: Option<String>,
    /// Geometry file, relative to the config file.
    pub file: Option<PathBuf>,
    /// One coefficient per patch, or a single value for all.
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// Relative tolerance for interface agreement.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub degrees: Vec<usize>,
    pub min_level: usize,
    pub max_level: usize,
    pub solution: String,
    #[serde(default = "default_constraint")]
    pub constraint: String,
    /// CSV path, relative to the config file.
    pub output: Option<PathBuf>,
    /// Record wall-clock seconds per cell; off gives reproducible files.
    #[serde(default = "yes")]
    pub timings: bool,
    #[serde(default = "default_ratio")]
    pub ratio_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SipgSection {
    #[serde(default = "default_sigma0")]
    pub sigma0: f64,
    /// Explicit σ, at least `σ₀ p²`.
    pub sigma: Option<f64>,
    #[serde(default)]
    pub local_h: bool,
}

impl Default for SipgSection {
    fn default() -> Self {
        Self { sigma0: DEFAULT_SIGMA0, sigma: None, local_h: false }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default = "one")]
    pub element_extra: usize,
    #[serde(default)]
    pub interface_extra: usize,
    /// Additional points used when measuring errors.
    #[serde(default = "two")]
    pub error_extra: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self { element_extra: 1, interface_extra: 0, error_extra: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub max_iterations: Option<usize>,
    #[serde(default = "default_preconditioner")]
    pub preconditioner: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            tolerance: default_tolerance(),
            max_iterations: None,
            preconditioner: default_preconditioner(),
        }
    }
}

fn default_constraint() -> String {
    "dirichlet".into()
}
fn default_method() -> String {
    "direct".into()
}
fn default_preconditioner() -> String {
    "diagonal".into()
}
fn default_tolerance() -> f64 {
    1e-12
}
fn default_sigma0() -> f64 {
    DEFAULT_SIGMA0
}
fn default_ratio() -> f64 {
    DEFAULT_RATIO_THRESHOLD
}
fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub domain: DomainSection,
    pub study: StudySection,
    #[serde(default)]
    pub sipg: SipgSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub solver: SolverSection,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl StudyConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: StudyConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.domain.builtin, &self.domain.file) {
            (Some(_), Some(_)) => return Err(Error::Config("give either domain.builtin or domain.file, not both".into())),
            (None, None) => return Err(Error::Config("domain.builtin or domain.file is required".into())),
            _ => {}
        }
        if self.domain.alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::Config("alpha values must be positive".into()));
        }
        if self.study.degrees.is_empty() {
            return Err(Error::Config("study.degrees must not be empty".into()));
        }
        if let Some(p) = self.study.degrees.iter().find(|p| **p < 2) {
            return Err(Error::Config(format!("spline degree {p} is below 2")));
        }
        if self.study.min_level < 1 || self.study.max_level < self.study.min_level {
            return Err(Error::Config(format!(
                "levels must satisfy 1 <= min_level <= max_level, got {}..{}",
                self.study.min_level, self.study.max_level
            )));
        }
        if !(self.sipg.sigma0 > 0.0) {
            return Err(Error::Config("sipg.sigma0 must be positive".into()));
        }
        self.solution_id()?;
        self.constraint_mode()?;
        self.solver_settings()?.validate()?;
        Ok(())
    }

    pub fn solution_id(&self) -> Result<SolutionId> {
        self.study.solution.parse()
    }

    pub fn constraint_mode(&self) -> Result<ConstraintMode> {
        self.study.constraint.parse()
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<usize> {
        self.study.min_level..=self.study.max_level
    }

    pub fn quadrature(&self) -> QuadratureSettings {
        QuadratureSettings { element_extra: self.quadrature.element_extra, interface_extra: self.quadrature.interface_extra }
    }

    pub fn error_quadrature(&self) -> QuadratureSettings {
        self.quadrature().raised(self.quadrature.error_extra)
    }

    pub fn solver_settings(&self) -> Result<SolverSettings> {
        let method = match self.solver.method.to_ascii_lowercase().as_str() {
            "direct" => SolverMethod::Direct,
            "cg" => SolverMethod::Cg,
            other => return Err(Error::Config(format!("unknown solver method `{other}`"))),
        };
        let preconditioner = match self.solver.preconditioner.to_ascii_lowercase().as_str() {
            "none" => Preconditioner::None,
            "diagonal" | "jacobi" => Preconditioner::Diagonal,
            other => return Err(Error::Config(format!("unknown preconditioner `{other}`"))),
        };
        Ok(SolverSettings {
            method,
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
            preconditioner,
        })
    }

    /// The geometry template with coefficients and tolerance applied.
    pub fn template(&self) -> Result<DomainTemplate> {
        let mut t = match (&self.domain.builtin, &self.domain.file) {
            (Some(name), _) => builtin_template(name)?,
            (None, Some(file)) => load_geometry(&self.base_dir.join(file))?,
            (None, None) => return Err(Error::Config("no domain given".into())),
        };
        if let Some(tol) = self.domain.tolerance {
            t.tolerance = tol;
        }
        t.with_alpha(&self.domain.alpha)
    }

    /// Patch coefficients after applying the config to the template.
    pub fn alphas(&self) -> Result<Vec<f64>> {
        Ok(self.template()?.patches.iter().map(|p| p.alpha).collect())
    }

    pub fn output_path(&self) -> Option<PathBuf> {
        self.study.output.as_ref().map(|p| self.base_dir.join(p))
    }
}
