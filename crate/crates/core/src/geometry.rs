//! Patch geometry maps `G : [0,1]² → Ω_k` given as polynomial tensor B-splines.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::splines::{Edge, TensorSplineSpace};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Value, gradient and Hessian of a scalar function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec2,
    pub hess: Mat2,
}

impl Jet {
    pub fn zero() -> Self {
        Self { value: 0.0, grad: Vec2::zeros(), hess: Mat2::zeros() }
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        Jet { value: self.value - rhs.value, grad: self.grad - rhs.grad, hess: self.hess - rhs.hess }
    }
}

/// Map value and first/second derivatives at a parameter point.
#[derive(Debug, Clone, Copy)]
pub struct MapDerivatives {
    pub value: Vec2,
    /// `jacobian[(i, a)] = ∂G_i/∂ξ_a`
    pub jacobian: Mat2,
    /// `hessian[i][(a, b)] = ∂²G_i/∂ξ_a∂ξ_b`
    pub hessian: [Mat2; 2],
}

impl MapDerivatives {
    pub fn det(&self) -> f64 {
        self.jacobian.determinant()
    }

    /// Physical gradient and Hessian from parametric ones by the chain rule.
    ///
    /// With `J` the Jacobian, `∇u = J⁻ᵀ ∇û` and
    /// `∇²u = J⁻ᵀ (∇²û − Σ_i (∇u)_i ∇²G_i) J⁻¹`.
    pub fn push_forward(&self, grad_hat: Vec2, hess_hat: Option<Mat2>) -> Result<(Vec2, Mat2)> {
        let inv = self.jacobian.try_inverse().ok_or_else(|| Error::Geometry("singular Jacobian".into()))?;
        let inv_t = inv.transpose();
        let grad = inv_t * grad_hat;
        let hess = match hess_hat {
            Some(h) => {
                let corrected = h - self.hessian[0] * grad[0] - self.hessian[1] * grad[1];
                inv_t * corrected * inv
            }
            None => Mat2::zeros(),
        };
        Ok((grad, hess))
    }

    /// Parametric jet of `u ∘ G` from the physical jet of `u`.
    pub fn pull_back(&self, physical: &Jet) -> Jet {
        let j = &self.jacobian;
        let grad = j.transpose() * physical.grad;
        let hess = j.transpose() * physical.hess * j + self.hessian[0] * physical.grad[0] + self.hessian[1] * physical.grad[1];
        Jet { value: physical.value, grad, hess }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryRegularity {
    /// Sampled maximum of `‖∇G‖₂` and `‖∇²G‖`.
    pub sup_grad: f64,
    /// Sampled maximum of `‖(∇G)⁻¹‖₂`.
    pub sup_inv_grad: f64,
    pub sup_hessian: f64,
    pub min_det: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryMap {
    space: TensorSplineSpace,
    control: Vec<Vec2>,
}

const DET_TOL: f64 = 1e-10;

impl GeometryMap {
    pub fn new(space: TensorSplineSpace, control: Vec<Vec2>) -> Result<Self> {
        if control.len() != space.dim() {
            return Err(Error::Geometry(format!("geometry needs {} control points, got {}", space.dim(), control.len())));
        }
        Ok(Self { space, control })
    }

    /// Bilinear patch through corners `(0,0), (1,0), (0,1), (1,1)` in this order.
    pub fn bilinear(corners: [Vec2; 4]) -> Self {
        let space = TensorSplineSpace::uniform(1, 1).expect("valid space");
        Self { space, control: corners.to_vec() }
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self::bilinear([Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x0, y1), Vec2::new(x1, y1)])
    }

    pub fn identity() -> Self {
        Self::rectangle(0.0, 1.0, 0.0, 1.0)
    }

    /// `ξ ↦ origin + A ξ`.
    pub fn affine(origin: Vec2, a: Mat2) -> Self {
        let c = |x: f64, y: f64| origin + a * Vec2::new(x, y);
        Self::bilinear([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)])
    }

    pub fn space(&self) -> &TensorSplineSpace {
        &self.space
    }

    pub fn control_points(&self) -> &[Vec2] {
        &self.control
    }

    /// The same map with its parameter axes swapped or mirrored; used to build
    /// patches whose local orientation differs from their neighbours.
    pub fn reparameterized(&self, transform: ParamTransform) -> Self {
        let (nx, ny) = (self.space.x.dim(), self.space.y.dim());
        let (space, dims) = match transform {
            ParamTransform::Rotate90 => (TensorSplineSpace::new(self.space.y.clone(), self.space.x.clone()), (ny, nx)),
            _ => (self.space.clone(), (nx, ny)),
        };
        let mut control = vec![Vec2::zeros(); self.control.len()];
        for j in 0..dims.1 {
            for i in 0..dims.0 {
                // new (i, j) takes old (oi, oj)
                let (oi, oj) = match transform {
                    ParamTransform::MirrorX => (nx - 1 - i, j),
                    ParamTransform::MirrorY => (i, ny - 1 - j),
                    ParamTransform::Rotate90 => (nx - 1 - j, i),
                    ParamTransform::Rotate180 => (nx - 1 - i, ny - 1 - j),
                };
                control[j * dims.0 + i] = self.control[oj * nx + oi];
            }
        }
        Self { space, control }
    }

    pub fn eval(&self, param: [f64; 2]) -> Result<Vec2> {
        let (idx, vals) = self.space.eval_tensor_basis(param, (0, 0))?;
        Ok(idx.iter().zip(&vals).map(|(&i, v)| self.control[i] * *v).sum())
    }

    pub fn derivatives(&self, param: [f64; 2]) -> Result<MapDerivatives> {
        let d = self.space.eval_derivatives(param)?;
        let mut out = MapDerivatives { value: Vec2::zeros(), jacobian: Mat2::zeros(), hessian: [Mat2::zeros(); 2] };
        for (a, &k) in d.indices.iter().enumerate() {
            let c = self.control[k];
            out.value += c * d.values[0][0][a];
            let gx = d.values[1][0][a];
            let gy = d.values[0][1][a];
            let hxx = d.values[2][0][a];
            let hxy = d.values[1][1][a];
            let hyy = d.values[0][2][a];
            for i in 0..2 {
                out.jacobian[(i, 0)] += c[i] * gx;
                out.jacobian[(i, 1)] += c[i] * gy;
                out.hessian[i][(0, 0)] += c[i] * hxx;
                out.hessian[i][(0, 1)] += c[i] * hxy;
                out.hessian[i][(1, 0)] += c[i] * hxy;
                out.hessian[i][(1, 1)] += c[i] * hyy;
            }
        }
        Ok(out)
    }

    pub fn jacobian(&self, param: [f64; 2]) -> Result<Mat2> {
        Ok(self.derivatives(param)?.jacobian)
    }

    pub fn hessian(&self, param: [f64; 2]) -> Result<[Mat2; 2]> {
        Ok(self.derivatives(param)?.hessian)
    }

    /// Tangent `d/dt G(γ(t))` along an edge parameterized as in [`Edge::point`].
    pub fn edge_tangent(&self, edge: Edge, t: f64) -> Result<Vec2> {
        let j = self.jacobian(edge.point(t))?;
        Ok(j.column(edge.tangent_axis()).into_owned())
    }

    /// Unit outward normal of the patch on `edge` at edge parameter `t`.
    pub fn edge_normal(&self, edge: Edge, t: f64) -> Result<Vec2> {
        let d = self.derivatives(edge.point(t))?;
        outward_normal(&d, edge)
    }

    /// Newton inversion `G(ξ) = target` within the parameter square.
    pub fn invert_point(&self, target: Vec2, guess: Option<[f64; 2]>) -> Result<[f64; 2]> {
        let scale = self.diameter().max(1.0);
        let tol = 1e-12 * scale;
        let mut xi = match guess {
            Some(g) => [g[0].clamp(0.0, 1.0), g[1].clamp(0.0, 1.0)],
            None => self.sample_guess(target)?,
        };
        let mut res = target - self.eval(xi)?;
        for _ in 0..50 {
            if res.norm() <= tol {
                return Ok(xi);
            }
            let j = self.jacobian(xi)?;
            let step = j.try_inverse().ok_or_else(|| Error::Geometry("singular Jacobian during inversion".into()))? * res;
            let mut damping = 1.0;
            loop {
                let trial = [(xi[0] + damping * step[0]).clamp(0.0, 1.0), (xi[1] + damping * step[1]).clamp(0.0, 1.0)];
                let trial_res = target - self.eval(trial)?;
                if trial_res.norm() < res.norm() || damping < 1e-4 {
                    xi = trial;
                    res = trial_res;
                    break;
                }
                damping *= 0.5;
            }
        }
        if res.norm() <= tol {
            Ok(xi)
        } else {
            Err(Error::Geometry(format!("point inversion did not converge (residual {:.3e})", res.norm())))
        }
    }

    fn sample_guess(&self, target: Vec2) -> Result<[f64; 2]> {
        let mut best = ([0.5, 0.5], f64::INFINITY);
        for j in 0..5 {
            for i in 0..5 {
                let q = [i as f64 / 4.0, j as f64 / 4.0];
                let d = (self.eval(q)? - target).norm();
                if d < best.1 {
                    best = (q, d);
                }
            }
        }
        Ok(best.0)
    }

    /// Diagonal of the control-point bounding box (bounds the patch diameter).
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::repeat(f64::INFINITY);
        let mut hi = Vec2::repeat(f64::NEG_INFINITY);
        for c in &self.control {
            lo = lo.inf(c);
            hi = hi.sup(c);
        }
        (lo, hi)
    }

    /// Samples `∇G`, `∇²G` and `(∇G)⁻¹` on a uniform grid of `samples²` points.
    pub fn estimate_regularity(&self, samples: usize) -> Result<GeometryRegularity> {
        if samples < 10 {
            return Err(Error::OutOfRange("regularity sampling needs at least 10 points per direction".into()));
        }
        let mut reg = GeometryRegularity { sup_grad: 0.0, sup_inv_grad: 0.0, sup_hessian: 0.0, min_det: f64::INFINITY };
        for j in 0..samples {
            for i in 0..samples {
                let q = [i as f64 / (samples - 1) as f64, j as f64 / (samples - 1) as f64];
                let d = self.derivatives(q)?;
                let det = d.det();
                if det <= DET_TOL {
                    return Err(Error::Geometry(format!(
                        "Jacobian determinant {det:.3e} at ({:.3}, {:.3}); map is not a valid patch",
                        q[0], q[1]
                    )));
                }
                let inv = d.jacobian.try_inverse().expect("det checked");
                let hess = (d.hessian[0].norm_squared() + d.hessian[1].norm_squared()).sqrt();
                reg.sup_grad = reg.sup_grad.max(spectral_norm(&d.jacobian)).max(hess);
                reg.sup_hessian = reg.sup_hessian.max(hess);
                reg.sup_inv_grad = reg.sup_inv_grad.max(spectral_norm(&inv));
                reg.min_det = reg.min_det.min(det);
            }
        }
        Ok(reg)
    }
}

/// Reparameterizations of the unit square used by [`GeometryMap::reparameterized`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamTransform {
    MirrorX,
    MirrorY,
    /// Counter-clockwise quarter turn of the parameter square; keeps the orientation.
    Rotate90,
    Rotate180,
}

pub(crate) fn outward_normal(d: &MapDerivatives, edge: Edge) -> Result<Vec2> {
    let tangent: Vec2 = d.jacobian.column(edge.tangent_axis()).into_owned();
    let len = tangent.norm();
    if len < 1e-12 {
        return Err(Error::Geometry(format!("degenerate tangent on edge {edge}")));
    }
    // clockwise rotation of the tangent points out of x=1 and y=0 for orientation-preserving maps
    let clockwise = Vec2::new(tangent[1], -tangent[0]) / len;
    let sign = match edge {
        Edge::XMax | Edge::YMin => 1.0,
        Edge::XMin | Edge::YMax => -1.0,
    };
    Ok(clockwise * sign * d.det().signum())
}

pub fn spectral_norm(m: &Mat2) -> f64 {
    // largest singular value of a 2×2 matrix
    let a = m.norm_squared();
    let det = m.determinant();
    let disc = (a * a - 4.0 * det * det).max(0.0).sqrt();
    ((a + disc) / 2.0).sqrt()
}
