//! Error norms in the dG norms, `H¹_D` spline projectors and convergence rates.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::assembly::{for_each_cell, for_each_interface_point, global_h, QuadratureSettings, SipgParameters};
use crate::error::{Error, Result};
use crate::geometry::Jet;
use crate::quadrature::gauss_rule;
use crate::space::{DgSpace, PatchFunction};
use crate::splines::{SplineSpace1D, TensorSplineSpace};
use crate::topology::MultiPatchDomain;

/// Norms of `u_h − u`; every entry is a norm, not a square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `|·|_{ℋ¹_α}`, the α-weighted broken H¹ seminorm.
    pub broken_h1_alpha: f64,
    /// `(·,·)_{C_h}^{1/2}`, the penalty part of the dG norm.
    pub jump_penalty: f64,
    pub qh: f64,
    pub qh_plus: f64,
    /// `|·|_{ℋ²_α}`, the α-weighted broken H² seminorm.
    pub broken_h2_alpha: f64,
    pub l2: f64,
}

impl ErrorReport {
    pub fn from_parts(h1_sq: f64, jump_sq: f64, h2_sq: f64, l2_sq: f64, h: f64, sigma: f64) -> Self {
        let qh_sq = h1_sq + jump_sq;
        let qh_plus_sq = qh_sq + (h / sigma).powi(2) * h2_sq;
        Self {
            broken_h1_alpha: h1_sq.sqrt(),
            jump_penalty: jump_sq.sqrt(),
            qh: qh_sq.sqrt(),
            qh_plus: qh_plus_sq.sqrt(),
            broken_h2_alpha: h2_sq.sqrt(),
            l2: l2_sq.sqrt(),
        }
    }
}

/// Measures `u_h − u` by element and interface quadrature.
pub fn error_vs_exact(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    params: &SipgParameters,
    quad: &QuadratureSettings,
    coeffs: &[f64],
    exact: &dyn PatchFunction,
) -> Result<ErrorReport> {
    if coeffs.len() != space.dim() {
        return Err(Error::Config(format!("field needs {} coefficients, got {}", space.dim(), coeffs.len())));
    }
    let (mut h1, mut h2, mut l2, mut jump) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..space.num_patches() {
        let alpha = domain.patches[k].alpha;
        for_each_cell(domain, space, k, quad.element_extra, true, |cell| {
            for pd in cell {
                let mut uh = Jet::zero();
                for (a, &i) in pd.dofs.iter().enumerate() {
                    let c = coeffs[i];
                    uh.value += c * pd.values[a];
                    uh.grad += pd.grads[a] * c;
                    uh.hess += pd.hessians[a] * c;
                }
                let e = uh - exact.jet(k, pd.x);
                h1 += alpha * pd.weight * e.grad.norm_squared();
                h2 += alpha * pd.weight * e.hess.norm_squared();
                l2 += pd.weight * e.value * e.value;
            }
            Ok(())
        })?;
    }
    for iface in &domain.interfaces {
        let c = params.penalty_factor(domain, iface) * domain.alpha_max(iface);
        for_each_interface_point(domain, space, iface, quad.interface_extra, |ip| {
            let vk: f64 = ip.k.dofs.iter().zip(&ip.k.values).map(|(&i, v)| coeffs[i] * v).sum();
            let vl: f64 = ip.l.dofs.iter().zip(&ip.l.values).map(|(&i, v)| coeffs[i] * v).sum();
            let ek = vk - exact.jet(iface.k, ip.x).value;
            let el = vl - exact.jet(iface.l, ip.x).value;
            jump += c * ip.weight * (ek - el).powi(2);
            Ok(())
        })?;
    }
    Ok(ErrorReport::from_parts(h1, jump, h2, l2, global_h(domain), params.sigma))
}

/// `r_ℓ = e_{ℓ−1} / e_ℓ` for consecutive levels.
pub fn convergence_rates(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::OutOfRange("rates need at least two errors".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::OutOfRange(format!("rate undefined for error {e}")));
    }
    Ok(errors.windows(2).map(|w| w[0] / w[1]).collect())
}

/// Gauss points per knot span used by the projector Gram matrix and load.
fn projector_points(p: usize) -> usize {
    p + 8
}

/// `H¹_D(0,1)`-orthogonal projection onto a univariate spline space, with
/// `(u, v)_{H¹_D} = (u′, v′)_{L₂(0,1)} + u(0) v(0)`.
#[derive(Debug, Clone)]
pub struct Projector1D {
    space: SplineSpace1D,
    gram: Cholesky<f64, Dyn>,
    /// Per span: quadrature nodes, weights and the derivatives of the active basis.
    nodes: Vec<(usize, f64, f64, Vec<f64>)>,
    at_zero: Vec<f64>,
}

impl Projector1D {
    pub fn new(space: SplineSpace1D) -> Result<Self> {
        let n = space.dim();
        let base = gauss_rule(projector_points(space.degree()))?;
        let mut gram = DMatrix::zeros(n, n);
        let mut nodes = Vec::new();
        for s in 0..space.intervals() {
            let (a, b) = space.span_bounds(s);
            let rule = base.mapped(a, b);
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let d = space.ders_in_span(s, t, 1);
                let first = s;
                for (i, di) in d[1].iter().enumerate() {
                    for (j, dj) in d[1].iter().enumerate() {
                        gram[(first + i, first + j)] += w * di * dj;
                    }
                }
                nodes.push((first, t, w, d[1].clone()));
            }
        }
        let b0 = space.eval_basis(0.0, 0)?;
        let mut at_zero = vec![0.0; n];
        for (a, v) in b0.values.iter().enumerate() {
            at_zero[b0.first + a] = *v;
        }
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += at_zero[i] * at_zero[j];
            }
        }
        let gram = Cholesky::new(gram).ok_or_else(|| Error::Internal("projector Gram matrix is not positive definite".into()))?;
        Ok(Self { space, gram, nodes, at_zero })
    }

    pub fn space(&self) -> &SplineSpace1D {
        &self.space
    }

    /// Quadrature abscissae where the projector samples `u′`.
    pub fn sample_points(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.1).collect()
    }

    /// Projection from `u(0)` and `u′` at [`Self::sample_points`].
    pub fn project_samples(&self, u0: f64, du: &[f64]) -> Vec<f64> {
        let mut rhs = DVector::zeros(self.space.dim());
        for ((first, _, w, d), g) in self.nodes.iter().zip(du) {
            for (a, v) in d.iter().enumerate() {
                rhs[first + a] += w * g * v;
            }
        }
        for (i, z) in self.at_zero.iter().enumerate() {
            rhs[i] += u0 * z;
        }
        self.gram.solve(&rhs).iter().copied().collect()
    }
}

/// `Π_{p,h} u` for `u` given with its derivative as `t ↦ (u(t), u′(t))`.
pub fn project_1d(proj: &Projector1D, u: &dyn Fn(f64) -> (f64, f64)) -> Vec<f64> {
    let du: Vec<f64> = proj.sample_points().into_iter().map(|t| u(t).1).collect();
    proj.project_samples(u(0.0).0, &du)
}

/// `Π̂ = Πˣ Πʸ` on the parameter square for `u` given as a parametric jet
/// (value, gradient and the mixed derivative in `hess[(0, 1)]`).
pub fn project_patch(space: &TensorSplineSpace, u: &dyn Fn([f64; 2]) -> Jet) -> Result<Vec<f64>> {
    let px = Projector1D::new(space.x.clone())?;
    let py = Projector1D::new(space.y.clone())?;
    let ys = py.sample_points();
    // y-projections of u(x, ·) and ∂ₓu(x, ·) as coefficient vectors over the y basis
    let fiber = |x: f64, dx: bool| -> Vec<f64> {
        let j0 = u([x, 0.0]);
        let u0 = if dx { j0.grad[0] } else { j0.value };
        let du: Vec<f64> = ys
            .iter()
            .map(|&y| {
                let j = u([x, y]);
                if dx {
                    j.hess[(0, 1)]
                } else {
                    j.grad[1]
                }
            })
            .collect();
        py.project_samples(u0, &du)
    };
    let at_zero = fiber(0.0, false);
    let xs = px.sample_points();
    let derivs: Vec<Vec<f64>> = xs.iter().map(|&x| fiber(x, true)).collect();
    let (nx, ny) = (space.x.dim(), space.y.dim());
    let mut coeffs = vec![0.0; nx * ny];
    for j in 0..ny {
        let du: Vec<f64> = derivs.iter().map(|c| c[j]).collect();
        let cx = px.project_samples(at_zero[j], &du);
        for (i, c) in cx.into_iter().enumerate() {
            coeffs[space.index(i, j)] = c;
        }
    }
    Ok(coeffs)
}

/// The patchwise projector `Π`: `Π̂_k` applied to `u ∘ G_k` on every patch.
pub fn project_patchwise(domain: &MultiPatchDomain, space: &DgSpace, u: &dyn PatchFunction) -> Result<Vec<f64>> {
    let mut out = vec![0.0; space.dim()];
    for k in 0..space.num_patches() {
        let geometry = &domain.patches[k].geometry;
        let failure = std::cell::RefCell::new(None);
        let pulled = |q: [f64; 2]| -> Jet {
            match geometry.derivatives(q) {
                Ok(map) => map.pull_back(&u.jet(k, map.value)),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Jet::zero()
                }
            }
        };
        let c = project_patch(space.patch_space(k), &pulled)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        out[space.offset(k)..space.offset(k + 1)].copy_from_slice(&c);
    }
    Ok(out)
}

/// `|v|_{H¹(Ω̂)}` of `Σ c_i φ_i − u` on the parameter square, `u` as a parametric jet.
pub fn parametric_h1_error(space: &TensorSplineSpace, coeffs: &[f64], u: &dyn Fn([f64; 2]) -> Jet, extra: usize) -> Result<f64> {
    let rule = crate::quadrature::element_rule(space, extra)?;
    let mut sum = 0.0;
    for iy in 0..rule.y.len() {
        for ix in 0..rule.x.len() {
            for (q, w) in rule.cell_points(ix, iy) {
                let d = space.derivatives_in_cell(ix, iy, q);
                let mut g = [0.0, 0.0];
                for (a, &i) in d.indices.iter().enumerate() {
                    g[0] += coeffs[i] * d.values[1][0][a];
                    g[1] += coeffs[i] * d.values[0][1][a];
                }
                let e = u(q);
                sum += w * ((g[0] - e.grad[0]).powi(2) + (g[1] - e.grad[1]).powi(2));
            }
        }
    }
    Ok(sum.sqrt())
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Mat2, Vec2};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn rates_examples() {
        let r = convergence_rates(&[0.03272, 0.00741, 0.00178]).unwrap();
        assert_eq!(format!("{:.1}", r[0]), "4.4");
        assert_eq!(format!("{:.1}", r[1]), "4.2");
        assert_eq!(convergence_rates(&[1.0, 1.0]).unwrap(), vec![1.0]);
        assert!(convergence_rates(&[1.0]).is_err());
        assert!(convergence_rates(&[1.0, 0.0]).is_err());
        assert!(convergence_rates(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn report_identities() {
        let r = ErrorReport::from_parts(4.0, 5.0, 16.0, 1.0, 0.5, 16.0);
        assert_abs_diff_eq!(r.qh * r.qh, r.broken_h1_alpha.powi(2) + r.jump_penalty.powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(r.qh_plus.powi(2), 9.0 + (0.5f64 / 16.0).powi(2) * 16.0, epsilon = 1e-14);
    }

    #[test]
    fn projector_reproduces_splines() {
        let s = SplineSpace1D::new(3, 5).unwrap();
        let c: Vec<f64> = (0..s.dim()).map(|i| (i as f64 * 1.3).sin()).collect();
        let proj = Projector1D::new(s.clone()).unwrap();
        let got = project_1d(&proj, &|t| (s.eval_spline(&c, t, 0).unwrap(), s.eval_spline(&c, t, 1).unwrap()));
        for (a, b) in got.iter().zip(&c) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn projector_endpoint_and_mean_identities() {
        let u = |t: f64| ((3.0 * t).exp() * (5.0 * t).sin(), (3.0 * t).exp() * (3.0 * (5.0 * t).sin() + 5.0 * (5.0 * t).cos()));
        for p in 2..=6 {
            let s = SplineSpace1D::new(p, 4).unwrap();
            let proj = Projector1D::new(s.clone()).unwrap();
            let c = project_1d(&proj, &u);
            assert!((s.eval_spline(&c, 0.0, 0).unwrap() - u(0.0).0).abs() <= 1e-11);
            assert!((s.eval_spline(&c, 1.0, 0).unwrap() - u(1.0).0).abs() <= 1e-11);
            let r = gauss_rule(30).unwrap();
            let mean: f64 = (0..4)
                .map(|e| r.mapped(e as f64 / 4.0, (e + 1) as f64 / 4.0).integrate(|t| u(t).0 - s.eval_spline(&c, t, 0).unwrap()))
                .sum();
            assert!(mean.abs() <= 1e-10, "p={p} mean={mean:e}");
        }
    }

    #[test]
    fn projector_h1_rate_for_sine() {
        let u = |t: f64| ((PI * t).sin(), PI * (PI * t).cos());
        let mut errs = Vec::new();
        let hs = [0.25, 0.125, 0.0625];
        for n in [4, 8, 16] {
            let s = SplineSpace1D::new(2, n).unwrap();
            let c = project_1d(&Projector1D::new(s.clone()).unwrap(), &u);
            let r = gauss_rule(12).unwrap();
            let e: f64 = (0..n)
                .map(|i| {
                    r.mapped(i as f64 / n as f64, (i + 1) as f64 / n as f64)
                        .integrate(|t| (u(t).1 - s.eval_spline(&c, t, 1).unwrap()).powi(2))
                })
                .sum();
            errs.push(e.sqrt());
        }
        assert!(log_log_slope(&hs, &errs) >= 1.9);
    }

    #[test]
    fn tensor_projector_constants_and_splines() {
        let s = TensorSplineSpace::uniform(2, 3).unwrap();
        let c = project_patch(&s, &|_| Jet { value: 2.5, grad: Vec2::zeros(), hess: Mat2::zeros() }).unwrap();
        assert!(c.iter().all(|v| (v - 2.5).abs() <= 1e-12));

        let coeffs: Vec<f64> = (0..s.dim()).map(|i| ((i * 7 % 5) as f64) * 0.3 - 0.6).collect();
        let jet = |q: [f64; 2]| {
            let v = |d| s.eval_spline(&coeffs, q, d).unwrap();
            Jet {
                value: v((0, 0)),
                grad: Vec2::new(v((1, 0)), v((0, 1))),
                hess: Mat2::new(v((2, 0)), v((1, 1)), v((1, 1)), v((0, 2))),
            }
        };
        let got = project_patch(&s, &jet).unwrap();
        for (a, b) in got.iter().zip(&coeffs) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn tensor_projector_first_order_slope() {
        let u = |q: [f64; 2]| {
            let (x, y) = (q[0], q[1]);
            let e = (x + 2.0 * y).exp();
            Jet {
                value: e * (3.0 * x).sin(),
                grad: Vec2::new(e * ((3.0 * x).sin() + 3.0 * (3.0 * x).cos()), 2.0 * e * (3.0 * x).sin()),
                hess: Mat2::new(
                    0.0,
                    2.0 * e * ((3.0 * x).sin() + 3.0 * (3.0 * x).cos()),
                    2.0 * e * ((3.0 * x).sin() + 3.0 * (3.0 * x).cos()),
                    0.0,
                ),
            }
        };
        let mut hs = Vec::new();
        let mut errs = Vec::new();
        for n in [2, 4, 8] {
            let s = TensorSplineSpace::uniform(2, n).unwrap();
            let c = project_patch(&s, &u).unwrap();
            hs.push(1.0 / n as f64);
            errs.push(parametric_h1_error(&s, &c, &u, 4).unwrap());
        }
        assert!(log_log_slope(&hs, &errs) >= 0.9);
    }
}
