//! The discontinuous multipatch space `V_h`: per-patch tensor spline spaces
//! with concatenated numbering, Dirichlet classification and discrete fields.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{Jet, Mat2, Vec2};
use crate::splines::TensorSplineSpace;
use crate::topology::MultiPatchDomain;

/// A function given patchwise on the physical domain, with gradient and Hessian.
pub trait PatchFunction {
    fn jet(&self, patch: usize, x: Vec2) -> Jet;
}

impl<F: Fn(usize, Vec2) -> Jet> PatchFunction for F {
    fn jet(&self, patch: usize, x: Vec2) -> Jet {
        self(patch, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMode {
    /// Solutions with vanishing mean, enforced by one Lagrange multiplier.
    ZeroMean,
    /// Prescribed values on the outer boundary, eliminated with lifting.
    Dirichlet,
}

impl std::str::FromStr for ConstraintMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero-mean" | "zero_mean" | "zeromean" => Ok(ConstraintMode::ZeroMean),
            "dirichlet" => Ok(ConstraintMode::Dirichlet),
            other => Err(Error::Config(format!("unknown constraint mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DgSpace {
    spaces: Vec<TensorSplineSpace>,
    offsets: Vec<usize>,
    dim: usize,
    mode: ConstraintMode,
    constrained: Vec<usize>,
    free: Vec<usize>,
}

impl DgSpace {
    /// Builds `V_h` on `domain` using each patch's discretization space.
    pub fn build(domain: &MultiPatchDomain, mode: ConstraintMode) -> Result<Self> {
        let mut spaces = Vec::with_capacity(domain.num_patches());
        let mut offsets = Vec::with_capacity(domain.num_patches() + 1);
        let mut dim = 0;
        for (k, patch) in domain.patches.iter().enumerate() {
            let s = &patch.space;
            if s.x.degree() < 2 || s.y.degree() < 2 {
                return Err(Error::Config(format!(
                    "patch {k} uses degree ({}, {}); spline degrees must be at least 2",
                    s.x.degree(),
                    s.y.degree()
                )));
            }
            offsets.push(dim);
            dim += s.dim();
            spaces.push(s.clone());
        }
        offsets.push(dim);

        let mut constrained = BTreeSet::new();
        if mode == ConstraintMode::Dirichlet {
            for &(k, edge) in &domain.boundary {
                constrained.extend(spaces[k].boundary_trace_indices(edge).into_iter().map(|i| offsets[k] + i));
            }
        }
        let free = (0..dim).filter(|i| !constrained.contains(i)).collect();
        Ok(Self { spaces, offsets, dim, mode, constrained: constrained.into_iter().collect(), free })
    }

    /// Total number of coefficients `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_patches(&self) -> usize {
        self.spaces.len()
    }

    pub fn patch_space(&self, k: usize) -> &TensorSplineSpace {
        &self.spaces[k]
    }

    /// Offset of patch `k`'s block in the global numbering.
    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// Offsets of all patches followed by `N`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn mode(&self) -> ConstraintMode {
        self.mode
    }

    /// Sorted global indices fixed by Dirichlet data (empty in zero-mean mode).
    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    /// Sorted global indices of the unknowns.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// Coefficient block of patch `k` within a global vector.
    pub fn block<'a>(&self, coeffs: &'a [f64], k: usize) -> &'a [f64] {
        &coeffs[self.offsets[k]..self.offsets[k + 1]]
    }
}

/// A member of `V_h` given by its global coefficient vector.
#[derive(Debug, Clone)]
pub struct DiscreteField<'a> {
    pub space: &'a DgSpace,
    pub coeffs: Vec<f64>,
}

impl<'a> DiscreteField<'a> {
    pub fn new(space: &'a DgSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::Config(format!("field needs {} coefficients, got {}", space.dim(), coeffs.len())));
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: &'a DgSpace) -> Self {
        Self { space, coeffs: vec![0.0; space.dim()] }
    }

    /// Parametric derivative `(dx, dy)` of the field on patch `k`.
    pub fn eval(&self, k: usize, param: [f64; 2], deriv: (usize, usize)) -> Result<f64> {
        self.space.patch_space(k).eval_spline(self.space.block(&self.coeffs, k), param, deriv)
    }

    /// Physical value, gradient and Hessian on patch `k` at a parameter point.
    pub fn eval_physical(&self, domain: &MultiPatchDomain, k: usize, param: [f64; 2]) -> Result<Jet> {
        let space = self.space.patch_space(k);
        let block = self.space.block(&self.coeffs, k);
        let d = space.eval_derivatives(param)?;
        let mut value = 0.0;
        let mut grad = Vec2::zeros();
        let mut hess = Mat2::zeros();
        for (a, &i) in d.indices.iter().enumerate() {
            let c = block[i];
            value += c * d.values[0][0][a];
            grad[0] += c * d.values[1][0][a];
            grad[1] += c * d.values[0][1][a];
            hess[(0, 0)] += c * d.values[2][0][a];
            hess[(0, 1)] += c * d.values[1][1][a];
            hess[(1, 1)] += c * d.values[0][2][a];
        }
        hess[(1, 0)] = hess[(0, 1)];
        let map = domain.patches[k].geometry.derivatives(param)?;
        let (grad, hess) = map.push_forward(grad, Some(hess))?;
        Ok(Jet { value, grad, hess })
    }
}

/// Boundary coefficients interpolating `g ∘ G_k ∘ γ` at the Greville points of
/// each boundary edge space, aligned with [`DgSpace::constrained`].
pub fn interpolate_boundary(domain: &MultiPatchDomain, space: &DgSpace, g: &dyn Fn(usize, Vec2) -> f64) -> Result<Vec<f64>> {
    if space.mode() != ConstraintMode::Dirichlet {
        return Err(Error::Config("boundary interpolation requires Dirichlet mode".into()));
    }
    let mut full = vec![0.0; space.dim()];
    for &(k, edge) in &domain.boundary {
        let ps = space.patch_space(k);
        let es = ps.edge_space(edge);
        let geometry = &domain.patches[k].geometry;
        let values = es.greville().into_iter().map(|t| Ok(g(k, geometry.eval(edge.point(t))?))).collect::<Result<Vec<f64>>>()?;
        let coeffs = es.interpolate(&values)?;
        for (local, c) in ps.boundary_trace_indices(edge).into_iter().zip(coeffs) {
            full[space.offset(k) + local] = c;
        }
    }
    Ok(space.constrained().iter().map(|&i| full[i]).collect())
}

/// Global vector holding `values` on the constrained indices and zeros elsewhere.
pub fn lifting(space: &DgSpace, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; space.dim()];
    for (&i, v) in space.constrained().iter().zip(values) {
        out[i] = *v;
    }
    out
}
