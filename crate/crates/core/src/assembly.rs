//! SIPG assembly: broken stiffness, interface consistency and penalty terms,
//! load vectors and the Gram matrices of the dG norms.

use crate::error::{Error, Result};
use crate::geometry::{outward_normal, MapDerivatives, Mat2, Vec2};
use crate::quadrature::{element_rule, interface_rule};
use crate::space::{interpolate_boundary, lifting, ConstraintMode, DgSpace, PatchFunction};
use crate::sparse::{SparseMatrix, SparseSymmetricMatrix, TripletBuilder};
use crate::topology::{Interface, MultiPatchDomain};

pub const DEFAULT_SIGMA0: f64 = 4.0;

/// Penalty parameter `σ = σ₀ p²` (or larger) and the choice of `h` in `σ / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SipgParameters {
    pub sigma0: f64,
    pub sigma: f64,
    /// Use `min(h_k, h_l)` per interface instead of the global `h`.
    pub local_h: bool,
}

impl SipgParameters {
    pub fn new(sigma0: f64, domain: &MultiPatchDomain) -> Result<Self> {
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(Error::Config(format!("sigma0 must be positive, got {sigma0}")));
        }
        let p = domain.mesh_quantities(f64::INFINITY).p as f64;
        Ok(Self { sigma0, sigma: sigma0 * p * p, local_h: false })
    }

    pub fn for_domain(domain: &MultiPatchDomain) -> Self {
        Self::new(DEFAULT_SIGMA0, domain).expect("default sigma0 is valid")
    }

    /// Raises `σ` above its default; values below `σ₀ p²` are rejected.
    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma >= self.sigma) {
            return Err(Error::Config(format!("sigma {sigma} is below sigma0 p^2 = {}", self.sigma)));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn with_local_h(mut self, local_h: bool) -> Self {
        self.local_h = local_h;
        self
    }

    /// `σ / h` for one interface.
    pub fn penalty_factor(&self, domain: &MultiPatchDomain, iface: &Interface) -> f64 {
        self.sigma / self.h_for(domain, iface)
    }

    fn h_for(&self, domain: &MultiPatchDomain, iface: &Interface) -> f64 {
        if self.local_h {
            domain.patches[iface.k].space.h().min(domain.patches[iface.l].space.h())
        } else {
            global_h(domain)
        }
    }
}

pub(crate) fn global_h(domain: &MultiPatchDomain) -> f64 {
    domain.patches.iter().map(|p| p.space.h()).fold(0.0, f64::max)
}

/// Extra Gauss points on top of the default element and interface rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSettings {
    pub element_extra: usize,
    pub interface_extra: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { element_extra: 1, interface_extra: 0 }
    }
}

impl QuadratureSettings {
    pub fn raised(self, by: usize) -> Self {
        Self { element_extra: self.element_extra + by, interface_extra: self.interface_extra + by }
    }
}

/// Basis data at one quadrature point of a patch.
pub(crate) struct PointData {
    pub x: Vec2,
    pub weight: f64,
    /// Global indices of the active functions.
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
    pub grads: Vec<Vec2>,
    pub hessians: Vec<Mat2>,
}

/// Physical basis data at `param` on patch `k`, with spans chosen explicitly.
pub(crate) fn point_data(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    k: usize,
    spans: (usize, usize),
    param: [f64; 2],
    with_hessian: bool,
) -> Result<(PointData, MapDerivatives)> {
    let ps = space.patch_space(k);
    let map = domain.patches[k].geometry.derivatives(param)?;
    let d = ps.derivatives_in_cell(spans.0, spans.1, param);
    let m = d.indices.len();
    let mut grads = Vec::with_capacity(m);
    let mut hessians = Vec::with_capacity(if with_hessian { m } else { 0 });
    for a in 0..m {
        let gh = Vec2::new(d.values[1][0][a], d.values[0][1][a]);
        let hh = with_hessian.then(|| Mat2::new(d.values[2][0][a], d.values[1][1][a], d.values[1][1][a], d.values[0][2][a]));
        let (g, h) = map.push_forward(gh, hh)?;
        grads.push(g);
        if with_hessian {
            hessians.push(h);
        }
    }
    let off = space.offset(k);
    Ok((
        PointData {
            x: map.value,
            weight: 0.0,
            dofs: d.indices.iter().map(|i| off + i).collect(),
            values: d.values[0][0].clone(),
            grads,
            hessians,
        },
        map,
    ))
}

/// Visits every element quadrature point of patch `k`, grouped per cell.
pub(crate) fn for_each_cell(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    k: usize,
    extra: usize,
    with_hessian: bool,
    mut visit: impl FnMut(&[PointData]) -> Result<()>,
) -> Result<()> {
    let ps = space.patch_space(k);
    let rule = element_rule(ps, extra)?;
    let mut cell = Vec::with_capacity(rule.points_per_cell());
    for iy in 0..rule.y.len() {
        for ix in 0..rule.x.len() {
            cell.clear();
            for (q, w) in rule.cell_points(ix, iy) {
                let (mut pd, map) = point_data(domain, space, k, (ix, iy), q, with_hessian)?;
                let det = map.det();
                if det.abs() <= 1e-14 {
                    return Err(Error::Geometry(format!("singular Jacobian on patch {k} at ({:.4}, {:.4})", q[0], q[1])));
                }
                pd.weight = w * det.abs();
                cell.push(pd);
            }
            visit(&cell)?;
        }
    }
    Ok(())
}

/// Both traces at one interface quadrature point.
pub(crate) struct InterfacePoint {
    pub x: Vec2,
    /// Quadrature weight times the arc-length factor.
    pub weight: f64,
    /// Unit normal pointing out of patch `k`.
    pub normal: Vec2,
    pub k: PointData,
    pub l: PointData,
}

/// Visits all quadrature points of one interface.
pub(crate) fn for_each_interface_point(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    iface: &Interface,
    extra: usize,
    mut visit: impl FnMut(&InterfacePoint) -> Result<()>,
) -> Result<()> {
    let sk = space.patch_space(iface.k);
    let sl = space.patch_space(iface.l);
    let reversed = iface.orientation == crate::topology::Orientation::Reversed;
    let rule = interface_rule(sk.edge_space(iface.edge_k), sl.edge_space(iface.edge_l), reversed, extra)?;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let qk = iface.param_k(t);
        let ql = iface.param_l(t);
        let spans_k = (sk.x.span_of(qk[0])?, sk.y.span_of(qk[1])?);
        let spans_l = (sl.x.span_of(ql[0])?, sl.y.span_of(ql[1])?);
        let (pk, map_k) = point_data(domain, space, iface.k, spans_k, qk, false)?;
        let (pl, _) = point_data(domain, space, iface.l, spans_l, ql, false)?;
        let tangent: Vec2 = map_k.jacobian.column(iface.edge_k.tangent_axis()).into_owned();
        let normal = outward_normal(&map_k, iface.edge_k)?;
        let point = InterfacePoint { x: pk.x, weight: w * tangent.norm(), normal, k: pk, l: pl };
        visit(&point)?;
    }
    Ok(())
}

/// Dense local block accumulated into triplets over both triangles.
fn push_local(builder: &mut TripletBuilder, dofs: &[usize], local: &[f64]) {
    let m = dofs.len();
    for a in 0..m {
        for b in 0..m {
            let v = local[a * m + b];
            if v != 0.0 {
                builder.push(dofs[a], dofs[b], v);
            }
        }
    }
}

fn volume_triplets(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    quad: &QuadratureSettings,
    h2_weight: f64,
) -> Result<TripletBuilder> {
    let n = space.dim();
    let mut builder = TripletBuilder::new(n, n);
    let with_hessian = h2_weight != 0.0;
    for k in 0..space.num_patches() {
        let alpha = domain.patches[k].alpha;
        let mut local = Vec::new();
        for_each_cell(domain, space, k, quad.element_extra, with_hessian, |cell| {
            let m = cell[0].dofs.len();
            local.clear();
            local.resize(m * m, 0.0);
            for pd in cell {
                let w = alpha * pd.weight;
                for a in 0..m {
                    for b in 0..m {
                        let mut v = pd.grads[a].dot(&pd.grads[b]);
                        if with_hessian {
                            v += h2_weight * pd.hessians[a].component_mul(&pd.hessians[b]).sum();
                        }
                        local[a * m + b] += w * v;
                    }
                }
            }
            push_local(&mut builder, &cell[0].dofs, &local);
            Ok(())
        })?;
    }
    Ok(builder)
}

/// Jump and averaged-flux coefficients of the active functions on both sides.
fn interface_vectors(domain: &MultiPatchDomain, iface: &Interface, ip: &InterfacePoint) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let ak = domain.patches[iface.k].alpha;
    let al = domain.patches[iface.l].alpha;
    let mut dofs = Vec::with_capacity(ip.k.dofs.len() + ip.l.dofs.len());
    let mut jump = Vec::with_capacity(dofs.capacity());
    let mut flux = Vec::with_capacity(dofs.capacity());
    for a in 0..ip.k.dofs.len() {
        dofs.push(ip.k.dofs[a]);
        jump.push(ip.k.values[a]);
        flux.push(0.5 * ak * ip.k.grads[a].dot(&ip.normal));
    }
    for a in 0..ip.l.dofs.len() {
        dofs.push(ip.l.dofs[a]);
        jump.push(-ip.l.values[a]);
        flux.push(0.5 * al * ip.l.grads[a].dot(&ip.normal));
    }
    (dofs, jump, flux)
}

fn penalty_triplets(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    params: &SipgParameters,
    quad: &QuadratureSettings,
) -> Result<TripletBuilder> {
    let n = space.dim();
    let mut builder = TripletBuilder::new(n, n);
    for iface in &domain.interfaces {
        let c = params.penalty_factor(domain, iface) * domain.alpha_max(iface);
        for_each_interface_point(domain, space, iface, quad.interface_extra, |ip| {
            let (dofs, jump, _) = interface_vectors(domain, iface, ip);
            let m = dofs.len();
            let mut local = vec![0.0; m * m];
            for a in 0..m {
                for b in 0..m {
                    local[a * m + b] = c * ip.weight * jump[a] * jump[b];
                }
            }
            push_local(&mut builder, &dofs, &local);
            Ok(())
        })?;
    }
    Ok(builder)
}

fn consistency_triplets(domain: &MultiPatchDomain, space: &DgSpace, quad: &QuadratureSettings) -> Result<TripletBuilder> {
    let n = space.dim();
    let mut builder = TripletBuilder::new(n, n);
    for iface in &domain.interfaces {
        for_each_interface_point(domain, space, iface, quad.interface_extra, |ip| {
            let (dofs, jump, flux) = interface_vectors(domain, iface, ip);
            // b_ij = (φ_j, φ_i)_B: the jump of the trial function against the flux of the test function
            let m = dofs.len();
            let mut local = vec![0.0; m * m];
            for a in 0..m {
                for b in 0..m {
                    local[a * m + b] = ip.weight * flux[a] * jump[b];
                }
            }
            push_local(&mut builder, &dofs, &local);
            Ok(())
        })?;
    }
    Ok(builder)
}

/// `(u, v)_{ℋ¹_α}`: patchwise `α_k`-weighted stiffness, no cross-patch entries.
pub fn assemble_volume(domain: &MultiPatchDomain, space: &DgSpace, quad: &QuadratureSettings) -> Result<SparseSymmetricMatrix> {
    Ok(volume_triplets(domain, space, quad, 0.0)?.into_symmetric())
}

/// `(u, v)_{C_h} = (σ/h) Σ α_{k,l} (⟦u⟧, ⟦v⟧)` over the physical interfaces.
pub fn assemble_penalty(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    params: &SipgParameters,
    quad: &QuadratureSettings,
) -> Result<SparseSymmetricMatrix> {
    Ok(penalty_triplets(domain, space, params, quad)?.into_symmetric())
}

/// The nonsymmetric matrix `b_ij = (φ_j, φ_i)_{B_h}`.
pub fn assemble_consistency(domain: &MultiPatchDomain, space: &DgSpace, quad: &QuadratureSettings) -> Result<SparseMatrix> {
    Ok(consistency_triplets(domain, space, quad)?.into_general())
}

/// `A_h = K − B − Bᵀ + C` over all `N` coefficients in lower-triangle storage.
pub fn assemble_operator(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    params: &SipgParameters,
    quad: &QuadratureSettings,
) -> Result<SparseSymmetricMatrix> {
    let mut all = volume_triplets(domain, space, quad, 0.0)?;
    all.extend(penalty_triplets(domain, space, params, quad)?);
    let b = consistency_triplets(domain, space, quad)?;
    for (r, c, v) in b.iter() {
        all.push(r, c, -v);
        all.push(c, r, -v);
    }
    Ok(all.into_symmetric())
}

/// `A_h` with both triangles stored, accumulated independently.
pub fn assemble_operator_full(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    params: &SipgParameters,
    quad: &QuadratureSettings,
) -> Result<SparseMatrix> {
    let k = volume_triplets(domain, space, quad, 0.0)?.into_general();
    let c = penalty_triplets(domain, space, params, quad)?.into_general();
    let b = consistency_triplets(domain, space, quad)?.into_general();
    let bt = b.transpose();
    Ok(SparseMatrix::linear_combination(&[(&k, 1.0), (&b, -1.0), (&bt, -1.0), (&c, 1.0)]))
}

/// `(f, φ_i)_{L₂(Ω)}` for a patchwise source.
pub fn assemble_load(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    quad: &QuadratureSettings,
    f: &dyn Fn(usize, Vec2) -> f64,
) -> Result<Vec<f64>> {
    let mut load = vec![0.0; space.dim()];
    for k in 0..space.num_patches() {
        for_each_cell(domain, space, k, quad.element_extra, false, |cell| {
            for pd in cell {
                let fw = f(k, pd.x) * pd.weight;
                for (a, &i) in pd.dofs.iter().enumerate() {
                    load[i] += fw * pd.values[a];
                }
            }
            Ok(())
        })?;
    }
    Ok(load)
}

/// `m_i = ∫_Ω φ_i`, the mean-value functional.
pub fn assemble_mean(domain: &MultiPatchDomain, space: &DgSpace, quad: &QuadratureSettings) -> Result<Vec<f64>> {
    assemble_load(domain, space, quad, &|_, _| 1.0)
}

/// `(u, φ_i)_{A_h}` for an analytically given `u` with exact traces and gradients.
pub fn assemble_exact_functional(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    params: &SipgParameters,
    quad: &QuadratureSettings,
    u: &dyn PatchFunction,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; space.dim()];
    for k in 0..space.num_patches() {
        let alpha = domain.patches[k].alpha;
        for_each_cell(domain, space, k, quad.element_extra, false, |cell| {
            for pd in cell {
                let g = u.jet(k, pd.x).grad;
                for (a, &i) in pd.dofs.iter().enumerate() {
                    out[i] += alpha * pd.weight * g.dot(&pd.grads[a]);
                }
            }
            Ok(())
        })?;
    }
    for iface in &domain.interfaces {
        let ak = domain.patches[iface.k].alpha;
        let al = domain.patches[iface.l].alpha;
        let c = params.penalty_factor(domain, iface) * domain.alpha_max(iface);
        for_each_interface_point(domain, space, iface, quad.interface_extra, |ip| {
            let uk = u.jet(iface.k, ip.x);
            let ul = u.jet(iface.l, ip.x);
            let u_jump = uk.value - ul.value;
            let u_flux = 0.5 * (ak * uk.grad + al * ul.grad).dot(&ip.normal);
            let (dofs, jump, flux) = interface_vectors(domain, iface, ip);
            for a in 0..dofs.len() {
                let v = -u_jump * flux[a] - jump[a] * u_flux + c * u_jump * jump[a];
                out[dofs[a]] += ip.weight * v;
            }
            Ok(())
        })?;
    }
    Ok(out)
}

/// Gram matrix of `Q_h`, or of `Q_h⁺` when `plus` is set.
pub fn assemble_qh_gram(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    params: &SipgParameters,
    quad: &QuadratureSettings,
    plus: bool,
) -> Result<SparseSymmetricMatrix> {
    let h = global_h(domain);
    let h2_weight = if plus { (h / params.sigma).powi(2) } else { 0.0 };
    let mut all = volume_triplets(domain, space, quad, h2_weight)?;
    all.extend(penalty_triplets(domain, space, params, quad)?);
    Ok(all.into_symmetric())
}

/// A linear system in the unknowns of a constraint mode.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: SparseSymmetricMatrix,
    pub rhs: Vec<f64>,
    pub mode: ConstraintMode,
    /// Global index of every unknown (excluding the multiplier).
    pub free: Vec<usize>,
    /// Full-length vector with the Dirichlet values, zero elsewhere.
    pub lifting: Vec<f64>,
}

impl LinearSystem {
    /// Global coefficient vector of length `N`; a trailing multiplier is dropped.
    pub fn expand(&self, solution: &[f64]) -> Result<Vec<f64>> {
        let expected = self.free.len();
        if solution.len() != expected && solution.len() != self.matrix.dim() {
            return Err(Error::Config(format!("solution has length {}, system has {expected}", solution.len())));
        }
        let mut full = self.lifting.clone();
        for (&g, v) in self.free.iter().zip(&solution[..expected]) {
            full[g] = *v;
        }
        Ok(full)
    }
}

/// Assembles `A_h u_h = f_h` in the space's constraint mode.
///
/// Dirichlet mode eliminates the boundary coefficients using the interpolated
/// data `g`; zero-mean mode appends the mean-value row and column.
pub fn assemble_system(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    params: &SipgParameters,
    quad: &QuadratureSettings,
    f: &dyn Fn(usize, Vec2) -> f64,
    g: &dyn Fn(usize, Vec2) -> f64,
) -> Result<LinearSystem> {
    let a = assemble_operator(domain, space, params, quad)?;
    let load = assemble_load(domain, space, quad, f)?;
    match space.mode() {
        ConstraintMode::Dirichlet => {
            let values = interpolate_boundary(domain, space, g)?;
            let lift = lifting(space, &values);
            let a_lift = a.mul_vec(&lift);
            let free = space.free().to_vec();
            let rhs = free.iter().map(|&i| load[i] - a_lift[i]).collect();
            Ok(LinearSystem { matrix: a.submatrix(&free), rhs, mode: space.mode(), free, lifting: lift })
        }
        ConstraintMode::ZeroMean => {
            let mean = assemble_mean(domain, space, quad)?;
            let mut rhs = load;
            rhs.push(0.0);
            Ok(LinearSystem {
                matrix: a.bordered(&mean),
                rhs,
                mode: space.mode(),
                free: (0..space.dim()).collect(),
                lifting: vec![0.0; space.dim()],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometryMap;
    use crate::splines::TensorSplineSpace;
    use crate::topology::{Patch, DEFAULT_TOLERANCE};
    use approx::assert_abs_diff_eq;

    fn two_squares(p: usize, n: usize, alpha: [f64; 2]) -> MultiPatchDomain {
        let s = TensorSplineSpace::uniform(p, n).unwrap();
        MultiPatchDomain::new(
            vec![
                Patch::new(GeometryMap::rectangle(0.0, 1.0, 0.0, 1.0), alpha[0], s.clone()).unwrap(),
                Patch::new(GeometryMap::rectangle(1.0, 2.0, 0.0, 1.0), alpha[1], s).unwrap(),
            ],
            DEFAULT_TOLERANCE,
        )
        .unwrap()
    }

    fn indicator(space: &DgSpace, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; space.dim()];
        for x in &mut v[space.offset(k)..space.offset(k + 1)] {
            *x = 1.0;
        }
        v
    }

    #[test]
    fn constants_in_stiffness_kernel_and_alpha_linearity() {
        let d = two_squares(2, 3, [1.0, 1.0]);
        let s = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        let q = QuadratureSettings::default();
        let k = assemble_volume(&d, &s, &q).unwrap();
        assert!(k.mul_vec(&vec![1.0; s.dim()]).iter().all(|v| v.abs() < 1e-13));

        let d10 = two_squares(2, 3, [10.0, 10.0]);
        let k10 = assemble_volume(&d10, &s, &q).unwrap();
        assert!(k10.add_scaled(&k, -10.0).max_abs() <= 1e-13 * k10.max_abs());
    }

    #[test]
    fn penalty_of_indicator_field() {
        let d = two_squares(2, 2, [1.0, 3.0]);
        let s = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        let params = SipgParameters::for_domain(&d);
        let c = assemble_penalty(&d, &s, &params, &QuadratureSettings::default()).unwrap();
        let v = indicator(&s, 0);
        let expected = params.sigma / 0.5 * 3.0;
        assert_abs_diff_eq!(c.quadratic_form(&v), expected, epsilon = 1e-10 * expected);
        // continuous (constant) field has no jump
        assert!(c.quadratic_form(&vec![1.0; s.dim()]).abs() < 1e-10);

        let doubled =
            assemble_penalty(&d, &s, &params.with_sigma(2.0 * params.sigma).unwrap(), &QuadratureSettings::default()).unwrap();
        assert!(doubled.add_scaled(&c, -2.0).max_abs() <= 1e-13 * doubled.max_abs());
    }

    #[test]
    fn qh_norm_of_indicator() {
        let d = two_squares(3, 2, [2.0, 1.0]);
        let s = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        let params = SipgParameters::for_domain(&d);
        let q = assemble_qh_gram(&d, &s, &params, &QuadratureSettings::default(), false).unwrap();
        let v = indicator(&s, 0);
        let expected = params.sigma * 2.0 / 0.5;
        assert_abs_diff_eq!(q.quadratic_form(&v), expected, epsilon = 1e-10 * expected);
        assert_eq!(q.quadratic_form(&vec![0.0; s.dim()]), 0.0);
    }

    #[test]
    fn single_patch_has_no_consistency_terms() {
        let d = MultiPatchDomain::new(
            vec![Patch::new(GeometryMap::identity(), 1.0, TensorSplineSpace::uniform(2, 2).unwrap()).unwrap()],
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        let s = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        let b = assemble_consistency(&d, &s, &QuadratureSettings::default()).unwrap();
        assert_eq!(b.nnz(), 0);
    }

    #[test]
    fn consistency_of_continuous_field_vanishes_in_jump_slot() {
        let d = two_squares(2, 2, [1.0, 1.0]);
        let s = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        let b = assemble_consistency(&d, &s, &QuadratureSettings::default()).unwrap();
        // B(u, ·) with u ≡ 1 continuous: the jump slot is the column side
        let r = b.mul_vec(&vec![1.0; s.dim()]);
        assert!(r.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn operator_is_symmetric_and_matches_full_storage() {
        let d = two_squares(3, 3, [1.0, 5.0]);
        let s = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        let params = SipgParameters::for_domain(&d);
        let q = QuadratureSettings::default();
        let a = assemble_operator(&d, &s, &params, &q).unwrap();
        let full = assemble_operator_full(&d, &s, &params, &q).unwrap();
        assert!(full.max_asymmetry() <= 1e-12 * full.max_abs());
        let diff = (a.to_dense() - full.to_dense()).abs().max();
        assert!(diff <= 1e-12 * a.max_abs());
    }

    #[test]
    fn dirichlet_system_with_zero_data() {
        let d = two_squares(2, 2, [1.0, 1.0]);
        let s = DgSpace::build(&d, ConstraintMode::Dirichlet).unwrap();
        let params = SipgParameters::for_domain(&d);
        let sys = assemble_system(&d, &s, &params, &QuadratureSettings::default(), &|_, _| 0.0, &|_, _| 0.0).unwrap();
        assert_eq!(sys.matrix.dim(), s.free().len());
        assert!(sys.rhs.iter().all(|v| *v == 0.0));
        let full = sys.expand(&vec![1.0; sys.matrix.dim()]).unwrap();
        assert_eq!(full.len(), s.dim());
    }

    #[test]
    fn zero_mean_system_is_bordered() {
        let d = two_squares(2, 2, [1.0, 1.0]);
        let s = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        let params = SipgParameters::for_domain(&d);
        let sys = assemble_system(&d, &s, &params, &QuadratureSettings::default(), &|_, _| 1.0, &|_, _| 0.0).unwrap();
        assert_eq!(sys.matrix.dim(), s.dim() + 1);
        let border: f64 = (0..s.dim()).map(|i| sys.matrix.get(s.dim(), i)).sum();
        assert_abs_diff_eq!(border, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn sigma_below_default_rejected() {
        let d = two_squares(2, 2, [1.0, 1.0]);
        let params = SipgParameters::for_domain(&d);
        assert_eq!(params.sigma, 16.0);
        assert!(params.with_sigma(10.0).is_err());
        assert!(SipgParameters::new(0.0, &d).is_err());
    }
}
