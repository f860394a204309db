//! Dense reference assembly of `A_h` by full basis summation.
//!
//! Shares no evaluation or quadrature code with the sparse assembly.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::assembly::SipgParameters;
use crate::error::{Error, Result};
use crate::geometry::{Mat2, Vec2};
use crate::splines::SplineSpace1D;
use crate::topology::{MultiPatchDomain, Orientation};

pub const ORACLE_POINTS: usize = 20;

/// Gauss–Legendre nodes and weights on `[0, 1]` via the Golub–Welsch eigenproblem.
pub fn golub_welsch(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|i| (0.5 * (eig.eigenvalues[i] + 1.0), eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `d`-th derivative of `N_{i,p}` by the textbook recursion.
///
/// Spans are half-open except the last one, which also contains the end knot.
pub fn naive_basis(knots: &[f64], i: usize, p: usize, t: f64, d: usize) -> f64 {
    if d > p {
        return 0.0;
    }
    if d == 0 {
        if p == 0 {
            let end = knots[knots.len() - 1];
            let inside = knots[i] <= t && t < knots[i + 1];
            let at_end = t == end && knots[i] < knots[i + 1] && knots[i + 1] == end;
            return if inside || at_end { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let den1 = knots[i + p] - knots[i];
        if den1 > 0.0 {
            v += (t - knots[i]) / den1 * naive_basis(knots, i, p - 1, t, 0);
        }
        let den2 = knots[i + p + 1] - knots[i + 1];
        if den2 > 0.0 {
            v += (knots[i + p + 1] - t) / den2 * naive_basis(knots, i + 1, p - 1, t, 0);
        }
        return v;
    }
    let mut v = 0.0;
    let den1 = knots[i + p] - knots[i];
    if den1 > 0.0 {
        v += p as f64 / den1 * naive_basis(knots, i, p - 1, t, d - 1);
    }
    let den2 = knots[i + p + 1] - knots[i + 1];
    if den2 > 0.0 {
        v -= p as f64 / den2 * naive_basis(knots, i + 1, p - 1, t, d - 1);
    }
    v
}

/// Values and first derivatives of every tensor basis function at an interior point.
fn all_tensor(x: &SplineSpace1D, y: &SplineSpace1D, q: [f64; 2]) -> Vec<(f64, f64, f64)> {
    let (nx, ny) = (x.dim(), y.dim());
    let bx: Vec<(f64, f64)> = (0..nx)
        .map(|i| (naive_basis(x.knots(), i, x.degree(), q[0], 0), naive_basis(x.knots(), i, x.degree(), q[0], 1)))
        .collect();
    let by: Vec<(f64, f64)> = (0..ny)
        .map(|j| (naive_basis(y.knots(), j, y.degree(), q[1], 0), naive_basis(y.knots(), j, y.degree(), q[1], 1)))
        .collect();
    let mut out = Vec::with_capacity(nx * ny);
    for (vy, dy) in &by {
        for (vx, dx) in &bx {
            out.push((vx * vy, dx * vy, vx * dy));
        }
    }
    out
}

struct PatchEval {
    x: Vec2,
    jac: Mat2,
    values: Vec<f64>,
    grads: Vec<Vec2>,
}

fn eval_patch(domain: &MultiPatchDomain, k: usize, q: [f64; 2]) -> Result<PatchEval> {
    let patch = &domain.patches[k];
    let gs = patch.geometry.space();
    let mut x = Vec2::zeros();
    let mut jac = Mat2::zeros();
    for (c, (v, dx, dy)) in patch.geometry.control_points().iter().zip(all_tensor(&gs.x, &gs.y, q)) {
        x += c * v;
        for r in 0..2 {
            jac[(r, 0)] += c[r] * dx;
            jac[(r, 1)] += c[r] * dy;
        }
    }
    let inv_t = jac.try_inverse().ok_or_else(|| Error::Geometry("oracle met a singular Jacobian".into()))?.transpose();
    let basis = all_tensor(&patch.space.x, &patch.space.y, q);
    Ok(PatchEval {
        x,
        jac,
        values: basis.iter().map(|b| b.0).collect(),
        grads: basis.iter().map(|b| inv_t * Vec2::new(b.1, b.2)).collect(),
    })
}

/// Dense `A_h = K − B − Bᵀ + C` over all coefficients of the domain's patch spaces.
pub fn dense_operator(domain: &MultiPatchDomain, params: &SipgParameters) -> Result<DMatrix<f64>> {
    let offsets: Vec<usize> = domain
        .patches
        .iter()
        .scan(0, |acc, p| {
            let o = *acc;
            *acc += p.space.dim();
            Some(o)
        })
        .collect();
    let n: usize = domain.patches.iter().map(|p| p.space.dim()).sum();
    let mut a = DMatrix::zeros(n, n);
    let (gx, gw) = golub_welsch(ORACLE_POINTS);

    for (k, patch) in domain.patches.iter().enumerate() {
        let xs = patch.space.x.breakpoints();
        let ys = patch.space.y.breakpoints();
        for cy in ys.windows(2) {
            for cx in xs.windows(2) {
                for (ty, wy) in gx.iter().zip(&gw) {
                    for (tx, wx) in gx.iter().zip(&gw) {
                        let q = [cx[0] + tx * (cx[1] - cx[0]), cy[0] + ty * (cy[1] - cy[0])];
                        let w = wx * wy * (cx[1] - cx[0]) * (cy[1] - cy[0]);
                        let e = eval_patch(domain, k, q)?;
                        let wt = w * e.jac.determinant().abs() * patch.alpha;
                        let m = e.grads.len();
                        for i in 0..m {
                            for j in 0..m {
                                a[(offsets[k] + i, offsets[k] + j)] += wt * e.grads[i].dot(&e.grads[j]);
                            }
                        }
                    }
                }
            }
        }
    }

    let h = domain.patches.iter().map(|p| p.space.h()).fold(0.0, f64::max);
    for iface in &domain.interfaces {
        let (pk, pl) = (&domain.patches[iface.k], &domain.patches[iface.l]);
        let reversed = iface.orientation == Orientation::Reversed;
        let mut cuts: Vec<f64> = pk.space.direction(iface.edge_k.tangent_axis()).breakpoints();
        for s in pl.space.direction(iface.edge_l.tangent_axis()).breakpoints() {
            cuts.push(if reversed { 1.0 - s } else { s });
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let penalty = params.sigma / if params.local_h { pk.space.h().min(pl.space.h()) } else { h } * pk.alpha.max(pl.alpha);
        for seg in cuts.windows(2) {
            for (t0, w0) in gx.iter().zip(&gw) {
                let t = seg[0] + t0 * (seg[1] - seg[0]);
                let w = w0 * (seg[1] - seg[0]);
                let s = if reversed { 1.0 - t } else { t };
                let ek = eval_patch(domain, iface.k, iface.edge_k.point(t))?;
                let el = eval_patch(domain, iface.l, iface.edge_l.point(s))?;
                let tangent: Vec2 = ek.jac.column(iface.edge_k.tangent_axis()).into_owned();
                let ds = tangent.norm();
                let mut normal = Vec2::new(-tangent[1], tangent[0]) / ds;
                // orient away from the interior of patch k
                let mut inner = iface.edge_k.point(t);
                let axis = iface.edge_k.normal_axis();
                inner[axis] = if iface.edge_k.is_max_side() { 1.0 - 1e-3 } else { 1e-3 };
                let probe = eval_patch(domain, iface.k, inner)?.x;
                if normal.dot(&(probe - ek.x)) > 0.0 {
                    normal = -normal;
                }
                let mut jump = vec![0.0; n];
                let mut flux = vec![0.0; n];
                for (i, (v, g)) in ek.values.iter().zip(&ek.grads).enumerate() {
                    jump[offsets[iface.k] + i] += v;
                    flux[offsets[iface.k] + i] += 0.5 * pk.alpha * g.dot(&normal);
                }
                for (i, (v, g)) in el.values.iter().zip(&el.grads).enumerate() {
                    jump[offsets[iface.l] + i] -= v;
                    flux[offsets[iface.l] + i] += 0.5 * pl.alpha * g.dot(&normal);
                }
                let wt = w * ds;
                for i in 0..n {
                    if jump[i] == 0.0 && flux[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        a[(i, j)] += wt * (penalty * jump[i] * jump[j] - flux[i] * jump[j] - jump[i] * flux[j]);
                    }
                }
            }
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn golub_welsch_rule_is_exact() {
        let (x, w) = golub_welsch(ORACLE_POINTS);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        for d in [0, 5, 17, 39] {
            let s: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(d)).sum();
            assert_abs_diff_eq!(s, 1.0 / (d as f64 + 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn naive_basis_partition_and_derivative() {
        let s = SplineSpace1D::new(3, 4).unwrap();
        for t in [0.0, 0.05, 0.3, 0.61, 0.99, 1.0] {
            let sum: f64 = (0..s.dim()).map(|i| naive_basis(s.knots(), i, 3, t, 0)).sum();
            let dsum: f64 = (0..s.dim()).map(|i| naive_basis(s.knots(), i, 3, t, 1)).sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(dsum, 0.0, epsilon = 1e-12);
        }
    }
}
