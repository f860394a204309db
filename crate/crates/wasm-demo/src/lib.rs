//! Browser bindings: spline basis curves, a multipatch solve sampled for
//! plotting, and a refinement sweep.

use wasm_bindgen::prelude::*;

use iga_sipg::analysis::{convergence_rates, error_vs_exact};
use iga_sipg::assembly::{assemble_system, QuadratureSettings, SipgParameters};
use iga_sipg::harness::{builtin_domain, ManufacturedSolution, SolutionId, BUILTIN_DOMAINS};
use iga_sipg::solver::{solve, SolverSettings};
use iga_sipg::space::{ConstraintMode, DgSpace, DiscreteField};
use iga_sipg::splines::SplineSpace1D;
use iga_sipg::topology::MultiPatchDomain;

const MAX_LEVEL: usize = 5;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Comma-separated names of the built-in domains.
#[wasm_bindgen]
pub fn domain_names() -> String {
    BUILTIN_DOMAINS.join(",")
}

/// Values of every B-spline of an open uniform knot vector at `samples`
/// equispaced points of `[0, 1]`, one row of `samples` values per function.
#[wasm_bindgen]
pub fn basis_curves(degree: usize, intervals: usize, samples: usize) -> Result<Vec<f64>, String> {
    if samples < 2 {
        return Err("need at least two samples".into());
    }
    let space = SplineSpace1D::new(degree, intervals).map_err(err)?;
    let mut out = vec![0.0; space.dim() * samples];
    for s in 0..samples {
        let t = s as f64 / (samples - 1) as f64;
        let b = space.eval_basis(t, 0).map_err(err)?;
        for (a, v) in b.values.iter().enumerate() {
            out[(b.first + a) * samples + s] = *v;
        }
    }
    Ok(out)
}

/// A discrete solution sampled on a `resolution × resolution` parameter grid per patch.
#[wasm_bindgen]
pub struct FieldSample {
    points: Vec<f64>,
    values: Vec<f64>,
    resolution: usize,
    patches: usize,
    dofs: usize,
    error: f64,
}

#[wasm_bindgen]
impl FieldSample {
    /// Physical coordinates `x0, y0, x1, y1, …`, patch by patch, `x` parameter fastest.
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    #[wasm_bindgen(getter)]
    pub fn patches(&self) -> usize {
        self.patches
    }

    #[wasm_bindgen(getter)]
    pub fn dofs(&self) -> usize {
        self.dofs
    }

    /// `‖u − u_h‖_{Q_h}` against the manufactured solution.
    #[wasm_bindgen(getter)]
    pub fn error(&self) -> f64 {
        self.error
    }
}

struct Solved {
    domain: MultiPatchDomain,
    space: DgSpace,
    coeffs: Vec<f64>,
    error: f64,
}

fn solve_on(domain: MultiPatchDomain, solution: SolutionId) -> Result<Solved, String> {
    let alpha: Vec<f64> = domain.patches.iter().map(|p| p.alpha).collect();
    let u = ManufacturedSolution::new(solution, alpha).map_err(err)?;
    let space = DgSpace::build(&domain, ConstraintMode::Dirichlet).map_err(err)?;
    let params = SipgParameters::for_domain(&domain);
    let quad = QuadratureSettings::default();
    let system =
        assemble_system(&domain, &space, &params, &quad, &|k, x| u.source(k, x), &|k, x| u.boundary(k, x)).map_err(err)?;
    let x = solve(&system.matrix, &system.rhs, &SolverSettings::default()).map_err(err)?;
    let coeffs = system.expand(&x).map_err(err)?;
    let error = error_vs_exact(&domain, &space, &params, &quad.raised(2), &coeffs, &u).map_err(err)?.qh;
    Ok(Solved { domain, space, coeffs, error })
}

fn checked_level(level: usize) -> Result<usize, String> {
    if level > MAX_LEVEL {
        return Err(format!("level {level} is above the demo limit {MAX_LEVEL}"));
    }
    Ok(level)
}

/// Solves for a manufactured solution on a built-in domain and samples `u_h`.
#[wasm_bindgen]
pub fn solve_field(domain: &str, solution: &str, degree: usize, level: usize, resolution: usize) -> Result<FieldSample, String> {
    if resolution < 2 {
        return Err("resolution must be at least 2".into());
    }
    let id: SolutionId = solution.parse().map_err(err)?;
    let d = builtin_domain(domain, checked_level(level)?, degree, &[]).map_err(err)?;
    let solved = solve_on(d, id)?;
    let field = DiscreteField::new(&solved.space, solved.coeffs.clone()).map_err(err)?;
    let patches = solved.domain.num_patches();
    let mut points = Vec::with_capacity(2 * patches * resolution * resolution);
    let mut values = Vec::with_capacity(patches * resolution * resolution);
    for k in 0..patches {
        for j in 0..resolution {
            for i in 0..resolution {
                let q = [i as f64 / (resolution - 1) as f64, j as f64 / (resolution - 1) as f64];
                let x = solved.domain.patches[k].geometry.eval(q).map_err(err)?;
                points.extend([x[0], x[1]]);
                values.push(field.eval(k, q, (0, 0)).map_err(err)?);
            }
        }
    }
    Ok(FieldSample { points, values, resolution, patches, dofs: solved.space.dim(), error: solved.error })
}

/// Errors over levels `1..=max_level` as rows `N, e, rate`; the first rate is `NaN`.
#[wasm_bindgen]
pub fn convergence_sweep(domain: &str, solution: &str, degree: usize, max_level: usize) -> Result<Vec<f64>, String> {
    let id: SolutionId = solution.parse().map_err(err)?;
    if max_level < 1 {
        return Err("max_level must be at least 1".into());
    }
    let mut dofs = Vec::new();
    let mut errors = Vec::new();
    for level in 1..=checked_level(max_level)? {
        let solved = solve_on(builtin_domain(domain, level, degree, &[]).map_err(err)?, id)?;
        dofs.push(solved.space.dim() as f64);
        errors.push(solved.error);
    }
    let rates = convergence_rates(&errors).map_err(err)?;
    let mut out = Vec::with_capacity(3 * errors.len());
    for (i, (n, e)) in dofs.iter().zip(&errors).enumerate() {
        out.extend([*n, *e, if i == 0 { f64::NAN } else { rates[i - 1] }]);
    }
    Ok(out)
}
