use std::f64::consts::PI;

use proptest::prelude::*;

use iga_sipg::analysis::{error_vs_exact, project_patchwise};
use iga_sipg::assembly::{
    assemble_exact_functional, assemble_mean, assemble_operator, assemble_penalty, assemble_qh_gram, assemble_system,
    QuadratureSettings, SipgParameters,
};
use iga_sipg::geometry::{Jet, ParamTransform, Vec2};
use iga_sipg::harness::{builtin_domain, builtin_template, solve_case, CaseOptions, ManufacturedSolution, SolutionId};
use iga_sipg::solver::{solve, solve_cg, solve_direct, SolverSettings};
use iga_sipg::space::{ConstraintMode, DgSpace, PatchFunction};
use iga_sipg::sparse::dot;
use iga_sipg::topology::{trace_deviation, Interface};

/// `Σ a_m sin(b_m·x + c_m)`: smooth and globally continuous.
#[derive(Debug, Clone)]
struct Wave(Vec<(f64, [f64; 2], f64)>);

impl PatchFunction for Wave {
    fn jet(&self, _patch: usize, x: Vec2) -> Jet {
        let mut j = Jet::zero();
        for (a, b, c) in &self.0 {
            let b = Vec2::new(b[0], b[1]);
            let (s, co) = (b.dot(&x) + c).sin_cos();
            j.value += a * s;
            j.grad += a * co * b;
            j.hess -= a * s * b * b.transpose();
        }
        j
    }
}

fn wave() -> impl Strategy<Value = Wave> {
    prop::collection::vec((-1.0..1.0f64, [-3.0..3.0f64, -3.0..3.0f64], 0.0..PI), 1..4).prop_map(Wave)
}

fn free_vector(space: &DgSpace, raw: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; space.dim()];
    for (n, &i) in space.free().iter().enumerate() {
        w[i] = raw[n % raw.len()];
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn galerkin_orthogonality(raw in prop::collection::vec(-1.0..1.0f64, 8..40), name in prop::sample::select(vec!["square2", "lshape3", "footprint12"])) {
        let d = builtin_domain(name, 1, 2, &[]).unwrap();
        let res = solve_case(d, SolutionId::Sine, &CaseOptions::default()).unwrap();
        let q = QuadratureSettings::default();
        let a = assemble_operator(&res.domain, &res.space, &res.params, &q).unwrap();
        let exact = assemble_exact_functional(&res.domain, &res.space, &res.params, &q.raised(4), &res.solution).unwrap();
        let w = free_vector(&res.space, &raw);
        let au = a.mul_vec(&res.coeffs);
        let orth: f64 = w.iter().zip(au.iter().zip(&exact)).map(|(w, (x, e))| w * (x - e)).sum();
        let scale = a.quadratic_form(&w).sqrt() * a.quadratic_form(&res.coeffs).sqrt();
        prop_assert!(orth.abs() <= 1e-6 * scale, "{orth} vs {scale}");
    }

    #[test]
    fn operator_scales_with_alpha(s in 0.01..100.0f64, a0 in 0.1..10.0f64, a1 in 0.1..10.0f64, a2 in 0.1..10.0f64) {
        let q = QuadratureSettings::default();
        let d = builtin_domain("lshape3", 1, 2, &[a0, a1, a2]).unwrap();
        let ds = builtin_domain("lshape3", 1, 2, &[s * a0, s * a1, s * a2]).unwrap();
        let space = DgSpace::build(&d, ConstraintMode::Dirichlet).unwrap();
        let params = SipgParameters::for_domain(&d);
        for (x, y) in [
            (assemble_operator(&d, &space, &params, &q).unwrap(), assemble_operator(&ds, &space, &params, &q).unwrap()),
            (assemble_penalty(&d, &space, &params, &q).unwrap(), assemble_penalty(&ds, &space, &params, &q).unwrap()),
            (assemble_qh_gram(&d, &space, &params, &q, false).unwrap(), assemble_qh_gram(&ds, &space, &params, &q, false).unwrap()),
        ] {
            prop_assert!(y.add_scaled(&x, -s).max_abs() <= 1e-12 * y.max_abs());
        }
    }

    #[test]
    fn continuous_functions_have_no_jump(u in wave(), name in prop::sample::select(vec!["square2", "lshape3", "ring4", "footprint12"])) {
        let d = builtin_domain(name, 1, 2, &[]).unwrap();
        let space = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        let params = SipgParameters::for_domain(&d);
        let zero = vec![0.0; space.dim()];
        let r = error_vs_exact(&d, &space, &params, &QuadratureSettings::default(), &zero, &u).unwrap();
        prop_assert!(r.jump_penalty <= 1e-11 * r.broken_h1_alpha.max(1.0), "{r:?}");
    }

    #[test]
    fn norm_decomposition(u in wave(), c in prop::collection::vec(-1.0..1.0f64, 1..20)) {
        let d = builtin_domain("square2-nonmatch", 1, 2, &[]).unwrap();
        let space = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        let params = SipgParameters::for_domain(&d);
        let coeffs: Vec<f64> = (0..space.dim()).map(|i| c[i % c.len()]).collect();
        let r = error_vs_exact(&d, &space, &params, &QuadratureSettings::default(), &coeffs, &u).unwrap();
        let h = d.patches.iter().map(|p| p.space.h()).fold(0.0, f64::max);
        let qh2 = r.broken_h1_alpha.powi(2) + r.jump_penalty.powi(2);
        prop_assert!((r.qh.powi(2) - qh2).abs() <= 1e-12 * qh2);
        let plus2 = qh2 + (h / params.sigma).powi(2) * r.broken_h2_alpha.powi(2);
        prop_assert!((r.qh_plus.powi(2) - plus2).abs() <= 1e-12 * plus2);
    }

    #[test]
    fn direct_and_cg_agree(name in prop::sample::select(vec!["square2", "square2-nonmatch", "strip2", "ring4", "footprint12"]), p in 2usize..4) {
        let d = builtin_domain(name, 1, p, &[]).unwrap();
        let u = ManufacturedSolution::new(SolutionId::Sine, vec![1.0; d.num_patches()]).unwrap();
        let space = DgSpace::build(&d, ConstraintMode::Dirichlet).unwrap();
        let params = SipgParameters::for_domain(&d);
        let sys = assemble_system(&d, &space, &params, &QuadratureSettings::default(), &|k, x| u.source(k, x), &|k, x| u.boundary(k, x)).unwrap();
        let x = solve_direct(&sys.matrix, &sys.rhs).unwrap();
        let y = solve_cg(&sys.matrix, &sys.rhs, &SolverSettings { tolerance: 1e-12, ..Default::default() }).unwrap();
        let diff: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-8 * dot(&x, &x).sqrt());
    }
}

#[test]
fn zero_mean_solution_has_zero_mean() {
    for name in ["square2", "lshape3", "footprint12"] {
        let d = builtin_domain(name, 1, 2, &[]).unwrap();
        let opts = CaseOptions { mode: ConstraintMode::ZeroMean, ..Default::default() };
        let res = solve_case(d, SolutionId::Cosine, &opts).unwrap();
        let m = assemble_mean(&res.domain, &res.space, &QuadratureSettings::default()).unwrap();
        let area: f64 = m.iter().sum();
        let mean = dot(&m, &res.coeffs);
        let norm = dot(&res.coeffs, &res.coeffs).sqrt();
        assert!(mean.abs() <= 1e-10 * area * norm, "{name}: {mean}");
    }
}

#[test]
fn patch_test_on_affine_domains() {
    for name in ["square1", "square2", "square2-nonmatch", "strip2", "lshape3"] {
        for p in [2, 3, 4] {
            let res = solve_case(builtin_domain(name, 1, p, &[]).unwrap(), SolutionId::Poly, &CaseOptions::default()).unwrap();
            assert!(res.report.qh <= 1e-9, "{name} p={p}: {:?}", res.report);
        }
    }
}

#[test]
fn discrete_error_bounded_by_projection_error() {
    for name in ["square2", "square2-nonmatch", "lshape3", "ring4", "footprint12"] {
        for level in [1, 2] {
            let res =
                solve_case(builtin_domain(name, level, 2, &[]).unwrap(), SolutionId::Sine, &CaseOptions::default()).unwrap();
            let proj = project_patchwise(&res.domain, &res.space, &res.solution).unwrap();
            let q = QuadratureSettings::default().raised(2);
            let best = error_vs_exact(&res.domain, &res.space, &res.params, &q, &proj, &res.solution).unwrap().qh_plus;
            assert!(res.report.qh <= 10.0 * best, "{name} level {level}: {} vs {best}", res.report.qh);
        }
    }
}

#[test]
fn flipped_orientation_breaks_trace_agreement() {
    let d = builtin_domain("footprint12", 0, 2, &[]).unwrap();
    for iface in &d.interfaces {
        assert!(trace_deviation(&d.patches, iface).unwrap() <= d.tolerance);
        let flipped = Interface { orientation: iface.orientation.flipped(), ..*iface };
        assert!(trace_deviation(&d.patches, &flipped).unwrap() > d.tolerance);
    }
}

#[test]
fn error_invariant_under_reparameterization() {
    let base = solve_case(builtin_domain("square2", 2, 3, &[]).unwrap(), SolutionId::Sine, &CaseOptions::default()).unwrap();
    for t in [ParamTransform::Rotate90, ParamTransform::Rotate180, ParamTransform::MirrorX, ParamTransform::MirrorY] {
        let mut template = builtin_template("square2").unwrap();
        template.patches[1].geometry = template.patches[1].geometry.reparameterized(t);
        let d = template.discretize(2, 3).unwrap();
        let res = solve_case(d, SolutionId::Sine, &CaseOptions::default()).unwrap();
        let rel = (res.report.qh - base.report.qh).abs() / base.report.qh;
        assert!(rel <= 1e-8, "{t:?}: {} vs {}", res.report.qh, base.report.qh);
    }
}

#[test]
fn assembly_is_bitwise_deterministic() {
    let d = builtin_domain("footprint12", 1, 3, &[]).unwrap();
    let space = DgSpace::build(&d, ConstraintMode::Dirichlet).unwrap();
    let params = SipgParameters::for_domain(&d);
    let q = QuadratureSettings::default();
    let a = assemble_operator(&d, &space, &params, &q).unwrap();
    let b = assemble_operator(&d, &space, &params, &q).unwrap();
    assert_eq!(a, b);
    let (a, b) = (a.submatrix(space.free()), b.submatrix(space.free()));
    let rhs = vec![1.0; a.dim()];
    assert_eq!(solve(&a, &rhs, &SolverSettings::default()).unwrap(), solve(&b, &rhs, &SolverSettings::default()).unwrap());
}
