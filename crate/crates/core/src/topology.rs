//! Multipatch domains: patches with their coefficients and spline spaces,
//! interface discovery and validation, orientation, neighbour sets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{GeometryMap, Vec2};
use crate::splines::{Edge, TensorSplineSpace};

/// How the common parameter of an interface runs on the second patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Same,
    Reversed,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Same => Orientation::Reversed,
            Orientation::Reversed => Orientation::Same,
        }
    }

    /// Parameter on the second patch matching `t` on the first.
    pub fn map(self, t: f64) -> f64 {
        match self {
            Orientation::Same => t,
            Orientation::Reversed => 1.0 - t,
        }
    }
}

impl std::str::FromStr for Orientation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "same" => Ok(Orientation::Same),
            "reversed" | "reverse" => Ok(Orientation::Reversed),
            other => Err(Error::Parse(format!("unknown orientation `{other}`"))),
        }
    }
}

/// A common edge `I_{k,l}` of patches `k < l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interface {
    pub k: usize,
    pub l: usize,
    pub edge_k: Edge,
    pub edge_l: Edge,
    pub orientation: Orientation,
}

impl Interface {
    /// Parameter point on patch `k` at interface parameter `t`.
    pub fn param_k(&self, t: f64) -> [f64; 2] {
        self.edge_k.point(t)
    }

    /// Parameter point on patch `l` matching `param_k(t)`.
    pub fn param_l(&self, t: f64) -> [f64; 2] {
        self.edge_l.point(self.orientation.map(t))
    }
}

#[derive(Debug, Clone)]
pub struct Patch {
    pub geometry: GeometryMap,
    /// Diffusion coefficient `α_k > 0`.
    pub alpha: f64,
    /// Discretization space `S_{p_k,h_k}` on the parameter square.
    pub space: TensorSplineSpace,
}

impl Patch {
    pub fn new(geometry: GeometryMap, alpha: f64, space: TensorSplineSpace) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("patch coefficient must be positive, got {alpha}")));
        }
        Ok(Self { geometry, alpha, space })
    }
}

/// Interfaces and vertex contacts found by [`discover_interfaces`].
#[derive(Debug, Clone, Default)]
pub struct Discovery {
    pub interfaces: Vec<Interface>,
    pub vertex_contacts: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct MultiPatchDomain {
    pub patches: Vec<Patch>,
    pub interfaces: Vec<Interface>,
    /// `(patch, edge)` pairs on the outer boundary.
    pub boundary: Vec<(usize, Edge)>,
    pub vertex_contacts: Vec<(usize, usize)>,
    pub tolerance: f64,
}

/// `p`, `p_min`, `h` and the quasi-uniformity ratio `h / min_k h_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshQuantities {
    pub p: usize,
    pub p_min: usize,
    pub h: f64,
    pub ratio: f64,
    pub warnings: Vec<String>,
}

/// Relative tolerance for interface agreement.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_RATIO_THRESHOLD: f64 = 4.0;
const SAMPLES: usize = 33;

fn sample_params() -> impl Iterator<Item = f64> {
    // Chebyshev–Lobatto points, endpoints included
    (0..SAMPLES).map(|i| 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (SAMPLES - 1) as f64).cos()))
}

impl MultiPatchDomain {
    /// Builds a domain, discovering interfaces by sampling.
    pub fn new(patches: Vec<Patch>, tolerance: f64) -> Result<Self> {
        let found = discover_interfaces(&patches, tolerance)?;
        Self::assemble(patches, found, tolerance)
    }

    /// Builds a domain from an explicit interface list, validating each entry.
    pub fn with_interfaces(patches: Vec<Patch>, interfaces: Vec<Interface>, tolerance: f64) -> Result<Self> {
        let diameter = domain_diameter(&patches);
        let mut canonical = Vec::with_capacity(interfaces.len());
        for iface in interfaces {
            let iface = canonicalize(iface);
            if iface.k == iface.l || iface.l >= patches.len() {
                return Err(Error::Topology(format!("invalid interface between patches {} and {}", iface.k, iface.l)));
            }
            let dev = trace_deviation(&patches, &iface)?;
            if dev > tolerance * diameter {
                return Err(Error::Topology(format!(
                    "patches {} ({}) and {} ({}) do not agree on their interface (deviation {dev:.3e})",
                    iface.k, iface.edge_k, iface.l, iface.edge_l
                )));
            }
            canonical.push(iface);
        }
        Self::assemble(patches, Discovery { interfaces: canonical, vertex_contacts: Vec::new() }, tolerance)
    }

    fn assemble(patches: Vec<Patch>, found: Discovery, tolerance: f64) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::Topology("a domain needs at least one patch".into()));
        }
        let mut used = BTreeSet::new();
        for iface in &found.interfaces {
            for key in [(iface.k, iface.edge_k), (iface.l, iface.edge_l)] {
                if !used.insert(key) {
                    return Err(Error::Topology(format!("edge {} of patch {} belongs to more than one interface", key.1, key.0)));
                }
            }
        }
        let boundary = (0..patches.len())
            .flat_map(|k| Edge::ALL.into_iter().map(move |e| (k, e)))
            .filter(|key| !used.contains(key))
            .collect();
        let domain = Self { patches, interfaces: found.interfaces, boundary, vertex_contacts: found.vertex_contacts, tolerance };
        domain.spot_check_disjoint()?;
        for k in 0..domain.patches.len() {
            if domain.neighbors(k).len() > 4 {
                return Err(Error::Topology(format!("patch {k} has more than four neighbours")));
            }
        }
        Ok(domain)
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    /// `𝒩(k)`: patches sharing an edge with patch `k`.
    pub fn neighbors(&self, k: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self
            .interfaces
            .iter()
            .filter_map(|i| {
                if i.k == k {
                    Some(i.l)
                } else if i.l == k {
                    Some(i.k)
                } else {
                    None
                }
            })
            .collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    /// `α_{k,l} = max(α_k, α_l)`.
    pub fn alpha_max(&self, iface: &Interface) -> f64 {
        self.patches[iface.k].alpha.max(self.patches[iface.l].alpha)
    }

    pub fn diameter(&self) -> f64 {
        domain_diameter(&self.patches)
    }

    pub fn mesh_quantities(&self, ratio_threshold: f64) -> MeshQuantities {
        let p = self.patches.iter().map(|pt| pt.space.degree()).max().unwrap_or(0);
        let p_min = self.patches.iter().map(|pt| pt.space.x.degree().min(pt.space.y.degree())).min().unwrap_or(0);
        let h = self.patches.iter().map(|pt| pt.space.h()).fold(0.0, f64::max);
        let h_min = self.patches.iter().map(|pt| pt.space.x.h().min(pt.space.y.h())).fold(f64::INFINITY, f64::min);
        let ratio = h / h_min;
        let mut warnings = Vec::new();
        if ratio > ratio_threshold {
            warnings.push(format!("grid sizes are not quasi-uniform: h / h_min = {ratio} exceeds {ratio_threshold}"));
        }
        MeshQuantities { p, p_min, h, ratio, warnings }
    }

    /// Replaces every patch space; used by uniform refinement and degree changes.
    pub fn with_spaces(mut self, spaces: Vec<TensorSplineSpace>) -> Result<Self> {
        if spaces.len() != self.patches.len() {
            return Err(Error::Config("one space per patch required".into()));
        }
        for (p, s) in self.patches.iter_mut().zip(spaces) {
            p.space = s;
        }
        Ok(self)
    }

    fn spot_check_disjoint(&self) -> Result<()> {
        for (k, pk) in self.patches.iter().enumerate() {
            let center = pk.geometry.eval([0.5, 0.5])?;
            for (l, pl) in self.patches.iter().enumerate() {
                if k == l {
                    continue;
                }
                let (lo, hi) = pl.geometry.bounding_box();
                if center[0] < lo[0] || center[1] < lo[1] || center[0] > hi[0] || center[1] > hi[1] {
                    continue;
                }
                if let Ok(q) = pl.geometry.invert_point(center, None) {
                    if q.iter().all(|v| *v > 1e-6 && *v < 1.0 - 1e-6) {
                        return Err(Error::Topology(format!("patches {k} and {l} overlap")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn canonicalize(iface: Interface) -> Interface {
    if iface.k <= iface.l {
        iface
    } else {
        Interface { k: iface.l, l: iface.k, edge_k: iface.edge_l, edge_l: iface.edge_k, orientation: iface.orientation }
    }
}

fn domain_diameter(patches: &[Patch]) -> f64 {
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    for p in patches {
        let (a, b) = p.geometry.bounding_box();
        lo = lo.inf(&a);
        hi = hi.sup(&b);
    }
    (hi - lo).norm()
}

/// Largest sampled distance between `G_k(γ_{k,l}(t))` and the matching point on patch `l`.
pub fn trace_deviation(patches: &[Patch], iface: &Interface) -> Result<f64> {
    let gk = &patches[iface.k].geometry;
    let gl = &patches[iface.l].geometry;
    let mut worst: f64 = 0.0;
    for t in sample_params() {
        let a = gk.eval(iface.param_k(t))?;
        let b = gl.eval(iface.param_l(t))?;
        worst = worst.max((a - b).norm());
    }
    Ok(worst)
}

fn edge_samples(g: &GeometryMap, edge: Edge) -> Result<Vec<Vec2>> {
    sample_params().map(|t| g.eval(edge.point(t))).collect()
}

/// Distance from `p` to the image of an edge curve.
fn distance_to_edge(g: &GeometryMap, edge: Edge, p: Vec2) -> Result<f64> {
    let coarse = 64;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=coarse {
        let t = i as f64 / coarse as f64;
        let d = (g.eval(edge.point(t))? - p).norm();
        if d < best.1 {
            best = (t, d);
        }
    }
    // Newton on the squared distance along the curve
    let mut t = best.0;
    for _ in 0..20 {
        let c = g.eval(edge.point(t))?;
        let d = g.derivatives(edge.point(t))?;
        let tangent: Vec2 = d.jacobian.column(edge.tangent_axis()).into_owned();
        let ax = edge.tangent_axis();
        let curvature = Vec2::new(d.hessian[0][(ax, ax)], d.hessian[1][(ax, ax)]);
        let r = c - p;
        let grad = r.dot(&tangent);
        let hess = tangent.norm_squared() + r.dot(&curvature);
        if hess <= 0.0 {
            break;
        }
        let next = (t - grad / hess).clamp(0.0, 1.0);
        if (next - t).abs() < 1e-15 {
            break;
        }
        t = next;
    }
    let d = (g.eval(edge.point(t))? - p).norm();
    Ok(d.min(best.1))
}

fn points_on_edge(points: &[Vec2], g: &GeometryMap, edge: Edge, tol: f64) -> Result<usize> {
    let (lo, hi) = g.bounding_box();
    let mut count = 0;
    for p in points {
        if p[0] < lo[0] - tol || p[1] < lo[1] - tol || p[0] > hi[0] + tol || p[1] > hi[1] + tol {
            continue;
        }
        if distance_to_edge(g, edge, *p)? <= tol {
            count += 1;
        }
    }
    Ok(count)
}

/// Finds all pairs of patch edges with coinciding physical traces.
///
/// Rejects partial overlaps (T-junctions), coinciding curves whose
/// parameterizations disagree, and edges matching more than one partner.
/// Contacts in a single vertex are reported but carry no coupling.
pub fn discover_interfaces(patches: &[Patch], tolerance: f64) -> Result<Discovery> {
    if patches.is_empty() {
        return Err(Error::Topology("a domain needs at least one patch".into()));
    }
    let tol = tolerance * domain_diameter(patches);
    let samples: Vec<[Vec<Vec2>; 4]> = patches
        .iter()
        .map(|p| -> Result<[Vec<Vec2>; 4]> {
            Ok([
                edge_samples(&p.geometry, Edge::ALL[0])?,
                edge_samples(&p.geometry, Edge::ALL[1])?,
                edge_samples(&p.geometry, Edge::ALL[2])?,
                edge_samples(&p.geometry, Edge::ALL[3])?,
            ])
        })
        .collect::<Result<_>>()?;

    let mut out = Discovery::default();
    let mut contacts = BTreeSet::new();
    for k in 0..patches.len() {
        for l in k + 1..patches.len() {
            let (bk_lo, bk_hi) = patches[k].geometry.bounding_box();
            let (bl_lo, bl_hi) = patches[l].geometry.bounding_box();
            if bk_hi[0] + tol < bl_lo[0] || bl_hi[0] + tol < bk_lo[0] || bk_hi[1] + tol < bl_lo[1] || bl_hi[1] + tol < bk_lo[1] {
                continue;
            }
            for (ek_i, &edge_k) in Edge::ALL.iter().enumerate() {
                for (el_i, &edge_l) in Edge::ALL.iter().enumerate() {
                    let a = &samples[k][ek_i];
                    let b = &samples[l][el_i];
                    let same = a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
                    let rev = a.iter().zip(b.iter().rev()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
                    if same <= tol || rev <= tol {
                        let orientation = if same <= rev { Orientation::Same } else { Orientation::Reversed };
                        out.interfaces.push(Interface { k, l, edge_k, edge_l, orientation });
                        continue;
                    }
                    let a_on_b = points_on_edge(a, &patches[l].geometry, edge_l, tol)?;
                    let b_on_a = points_on_edge(b, &patches[k].geometry, edge_k, tol)?;
                    if a_on_b == SAMPLES && b_on_a == SAMPLES {
                        return Err(Error::Topology(format!(
                            "patches {k} ({edge_k}) and {l} ({edge_l}) share an edge but their parameterizations disagree"
                        )));
                    }
                    if a_on_b >= 2 || b_on_a >= 2 {
                        return Err(Error::Topology(format!(
                            "partial edge overlap (T-junction) between patch {k} ({edge_k}) and patch {l} ({edge_l})"
                        )));
                    }
                    if a_on_b == 1 || b_on_a == 1 {
                        contacts.insert((k, l));
                    }
                }
            }
        }
    }
    let coupled: BTreeSet<(usize, usize)> = out.interfaces.iter().map(|i| (i.k, i.l)).collect();
    out.vertex_contacts = contacts.difference(&coupled).copied().collect();
    Ok(out)
}
