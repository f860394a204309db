//! Refinement and degree sweeps producing error and rate tables.

use std::fmt::Write as _;
use std::time::Instant;

use crate::analysis::{convergence_rates, error_vs_exact, ErrorReport};
use crate::assembly::{assemble_system, QuadratureSettings, SipgParameters, DEFAULT_SIGMA0};
use crate::error::{Error, Result};
use crate::solver::{solve, SolverSettings};
use crate::space::{ConstraintMode, DgSpace};
use crate::topology::MultiPatchDomain;

use super::config::StudyConfig;
use super::solutions::{ManufacturedSolution, SolutionId};

/// Everything needed to discretize, solve and measure one case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseOptions {
    pub mode: ConstraintMode,
    pub sigma0: f64,
    pub sigma: Option<f64>,
    pub local_h: bool,
    pub quadrature: QuadratureSettings,
    pub error_quadrature: QuadratureSettings,
    pub solver: SolverSettings,
}

impl Default for CaseOptions {
    fn default() -> Self {
        Self {
            mode: ConstraintMode::Dirichlet,
            sigma0: DEFAULT_SIGMA0,
            sigma: None,
            local_h: false,
            quadrature: QuadratureSettings::default(),
            error_quadrature: QuadratureSettings::default().raised(2),
            solver: SolverSettings::default(),
        }
    }
}

impl CaseOptions {
    pub fn from_config(cfg: &StudyConfig) -> Result<Self> {
        Ok(Self {
            mode: cfg.constraint_mode()?,
            sigma0: cfg.sipg.sigma0,
            sigma: cfg.sipg.sigma,
            local_h: cfg.sipg.local_h,
            quadrature: cfg.quadrature(),
            error_quadrature: cfg.error_quadrature(),
            solver: cfg.solver_settings()?,
        })
    }

    pub fn parameters(&self, domain: &MultiPatchDomain) -> Result<SipgParameters> {
        let mut p = SipgParameters::new(self.sigma0, domain)?.with_local_h(self.local_h);
        if let Some(s) = self.sigma {
            p = p.with_sigma(s)?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub domain: MultiPatchDomain,
    pub space: DgSpace,
    pub params: SipgParameters,
    pub solution: ManufacturedSolution,
    /// Global coefficients of `u_h`.
    pub coeffs: Vec<f64>,
    pub report: ErrorReport,
    /// Wall-clock time of assembly and solve.
    pub seconds: f64,
}

/// Assembles and solves for a manufactured solution using the domain's coefficients.
pub fn solve_case(domain: MultiPatchDomain, id: SolutionId, opts: &CaseOptions) -> Result<CaseResult> {
    let alpha: Vec<f64> = domain.patches.iter().map(|p| p.alpha).collect();
    let solution = ManufacturedSolution::new(id, alpha)?;
    let space = DgSpace::build(&domain, opts.mode)?;
    let params = opts.parameters(&domain)?;
    let start = Instant::now();
    let system = assemble_system(&domain, &space, &params, &opts.quadrature, &|k, x| solution.source(k, x), &|k, x| {
        solution.boundary(k, x)
    })?;
    let x = solve(&system.matrix, &system.rhs, &opts.solver)?;
    let seconds = start.elapsed().as_secs_f64();
    let coeffs = system.expand(&x[..system.free.len()])?;
    let report = error_vs_exact(&domain, &space, &params, &opts.error_quadrature, &coeffs, &solution)?;
    Ok(CaseResult { domain, space, params, solution, coeffs, report, seconds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub p: usize,
    /// `N`, the dimension of `V_h`.
    pub dofs: usize,
    /// `‖u_h − u‖_{Q_h}`.
    pub error: f64,
    pub rate: Option<f64>,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    /// Cells that failed; the rest of their degree column is skipped.
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl StudyTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,p,N,e,rate,seconds\n");
        for r in &self.rows {
            let rate = r.rate.map(|v| format!("{v:.4}")).unwrap_or_default();
            let secs = r.seconds.map(|v| format!("{v:.3}")).unwrap_or_default();
            writeln!(out, "{},{},{},{:.5e},{rate},{secs}", r.level, r.p, r.dofs, r.error).expect("string write");
        }
        out
    }

    /// Errors of one degree column in level order.
    pub fn errors_for(&self, p: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.p == p).map(|r| r.error).collect()
    }
}

/// Runs every `(p, ℓ)` cell of a configuration; writes the CSV if an output path is set.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyTable> {
    let template = cfg.template()?;
    let opts = CaseOptions::from_config(cfg)?;
    let id = cfg.solution_id()?;
    let mut table = StudyTable::default();
    for &p in &cfg.study.degrees {
        let mut previous: Option<f64> = None;
        for level in cfg.levels() {
            let outcome = template.discretize(level, p).and_then(|domain| {
                let m = domain.mesh_quantities(cfg.study.ratio_threshold);
                table.warnings.extend(m.warnings.iter().map(|w| format!("p={p} level={level}: {w}")));
                solve_case(domain, id, &opts)
            });
            match outcome {
                Ok(res) => {
                    let e = res.report.qh;
                    let rate = match previous {
                        Some(prev) => Some(convergence_rates(&[prev, e])?[0]),
                        None => None,
                    };
                    previous = Some(e);
                    table.rows.push(StudyRow {
                        level,
                        p,
                        dofs: res.space.dim(),
                        error: e,
                        rate,
                        seconds: cfg.study.timings.then_some(res.seconds),
                    });
                }
                Err(err) => {
                    table.failures.push(format!("p={p} level={level}: {err}"));
                    break;
                }
            }
        }
    }
    if let Some(path) = cfg.output_path() {
        std::fs::write(&path, table.to_csv()).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::domains::builtin_domain;
    use std::path::Path;

    fn config(extra: &str) -> StudyConfig {
        let text = format!(
            "[domain]\nbuiltin = \"square2\"\n[study]\ndegrees = [2]\nmin_level = 1\nmax_level = 3\nsolution = \"sine\"\ntimings = false\n{extra}"
        );
        StudyConfig::parse(&text, Path::new(".")).unwrap()
    }

    #[test]
    fn rates_trend_towards_four() {
        let t = run_study(&config("")).unwrap();
        assert!(t.failures.is_empty());
        assert_eq!(t.rows.len(), 3);
        assert!(t.rows[0].rate.is_none());
        let last = t.rows[2].rate.unwrap();
        assert!((3.3..=5.0).contains(&last), "rate {last}");
    }

    #[test]
    fn csv_layout() {
        let t = StudyTable {
            rows: vec![
                StudyRow { level: 1, p: 2, dofs: 32, error: 0.0327212345, rate: None, seconds: Some(0.25) },
                StudyRow { level: 2, p: 2, dofs: 72, error: 0.00741, rate: Some(4.4157), seconds: None },
            ],
            ..Default::default()
        };
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,p,N,e,rate,seconds");
        assert_eq!(lines[1], "1,2,32,3.27212e-2,,0.250");
        assert_eq!(lines[2], "2,2,72,7.41000e-3,4.4157,");
    }

    #[test]
    fn deterministic_output() {
        let a = run_study(&config("")).unwrap().to_csv();
        let b = run_study(&config("")).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_mean_mode_solves_cosine() {
        let d = builtin_domain("square2", 2, 2, &[]).unwrap();
        let opts = CaseOptions { mode: ConstraintMode::ZeroMean, ..Default::default() };
        let res = solve_case(d, SolutionId::Cosine, &opts).unwrap();
        assert!(res.report.qh < 0.05, "{:?}", res.report);
    }

    #[test]
    fn failed_cell_is_recorded() {
        let cfg = config("[sipg]\nsigma = 1.0\n");
        let t = run_study(&cfg).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.failures.len(), 1);
    }
}
