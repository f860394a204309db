//! Built-in multipatch geometries and the geometry file format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeometryMap, ParamTransform, Vec2};
use crate::splines::{Edge, SplineSpace1D, TensorSplineSpace};
use crate::topology::{Interface, MultiPatchDomain, Orientation, Patch};

pub const BUILTIN_DOMAINS: [&str; 7] = ["square1", "square2", "square2-nonmatch", "strip2", "lshape3", "ring4", "footprint12"];

/// Intervals per direction at level 0.
pub const BASE_INTERVALS: usize = 2;

/// One patch of a [`DomainTemplate`]: its geometry and how its
/// discretization deviates from the global degree and grid.
#[derive(Debug, Clone)]
pub struct PatchTemplate {
    pub geometry: GeometryMap,
    pub alpha: f64,
    /// Added to the global degree `p`.
    pub degree_offset: usize,
    /// Multiplies the interval count of the level.
    pub refinement: usize,
}

/// A geometry without a discretization.
#[derive(Debug, Clone)]
pub struct DomainTemplate {
    pub patches: Vec<PatchTemplate>,
    /// Explicit interfaces; discovered by sampling when `None`.
    pub interfaces: Option<Vec<Interface>>,
    pub tolerance: f64,
}

impl DomainTemplate {
    fn plain(geometries: Vec<GeometryMap>) -> Self {
        Self {
            patches: geometries
                .into_iter()
                .map(|geometry| PatchTemplate { geometry, alpha: 1.0, degree_offset: 0, refinement: 1 })
                .collect(),
            interfaces: None,
            tolerance: crate::topology::DEFAULT_TOLERANCE,
        }
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    /// Replaces the coefficients; a single value applies to every patch.
    pub fn with_alpha(mut self, alpha: &[f64]) -> Result<Self> {
        match alpha.len() {
            0 => {}
            1 => self.patches.iter_mut().for_each(|p| p.alpha = alpha[0]),
            n if n == self.patches.len() => self.patches.iter_mut().zip(alpha).for_each(|(p, a)| p.alpha = *a),
            n => return Err(Error::Config(format!("alpha lists {n} values for a domain with {} patches", self.patches.len()))),
        }
        Ok(self)
    }

    /// Domain at refinement level `ℓ` with `2·2^ℓ` intervals per direction
    /// (times each patch's refinement factor) and degree `p` plus offsets.
    pub fn discretize(&self, level: usize, degree: usize) -> Result<MultiPatchDomain> {
        if level > 12 {
            return Err(Error::Config(format!("level {level} is beyond the supported range")));
        }
        let n = BASE_INTERVALS << level;
        let patches = self
            .patches
            .iter()
            .map(|t| {
                let space = TensorSplineSpace::uniform(degree + t.degree_offset, n * t.refinement)?;
                Patch::new(t.geometry.clone(), t.alpha, space)
            })
            .collect::<Result<Vec<_>>>()?;
        match &self.interfaces {
            Some(list) => MultiPatchDomain::with_interfaces(patches, list.clone(), self.tolerance),
            None => MultiPatchDomain::new(patches, self.tolerance),
        }
    }
}

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

/// Quarter annulus `1 ≤ r ≤ 2`, `θ ∈ [qπ/2, (q+1)π/2]`: radial in ξ (linear),
/// angular in η (quadratic, four intervals, interpolating the circle at Greville points).
fn ring_quarter(q: usize) -> Result<GeometryMap> {
    let radial = SplineSpace1D::new(1, 1)?;
    let angular = SplineSpace1D::new(2, 1)?;
    let theta = |t: f64| (q as f64 + t) * std::f64::consts::FRAC_PI_2;
    let greville = angular.greville();
    let cx = angular.interpolate(&greville.iter().map(|&t| theta(t).cos()).collect::<Vec<_>>())?;
    let cy = angular.interpolate(&greville.iter().map(|&t| theta(t).sin()).collect::<Vec<_>>())?;
    let mut control = Vec::with_capacity(2 * angular.dim());
    for j in 0..angular.dim() {
        for r in [1.0, 2.0] {
            control.push(v(r * cx[j], r * cy[j]));
        }
    }
    GeometryMap::new(TensorSplineSpace::new(radial, angular), control)
}

fn footprint_vertex(i: usize, j: usize) -> Vec2 {
    let (a, b) = (i as f64, j as f64);
    v(a + 0.18 * (1.7 * a + 2.3 * b + 0.5).sin(), b + 0.18 * (2.9 * a - 1.1 * b + 0.3).cos())
}

/// The template of a built-in domain.
pub fn builtin_template(name: &str) -> Result<DomainTemplate> {
    let t = match name {
        "square1" => DomainTemplate::plain(vec![GeometryMap::identity()]),
        "square2" => {
            DomainTemplate::plain(vec![GeometryMap::rectangle(0.0, 0.5, 0.0, 1.0), GeometryMap::rectangle(0.5, 1.0, 0.0, 1.0)])
        }
        "square2-nonmatch" => {
            let mut t = builtin_template("square2")?;
            t.patches[1].degree_offset = 1;
            t.patches[1].refinement = 2;
            t
        }
        "strip2" => {
            DomainTemplate::plain(vec![GeometryMap::rectangle(0.0, 1.0, 0.0, 1.0), GeometryMap::rectangle(1.0, 2.0, 0.0, 1.0)])
        }
        "lshape3" => DomainTemplate::plain(vec![
            GeometryMap::rectangle(0.0, 1.0, 0.0, 1.0),
            GeometryMap::rectangle(1.0, 2.0, 0.0, 1.0),
            GeometryMap::rectangle(0.0, 1.0, 1.0, 2.0),
        ]),
        "ring4" => DomainTemplate::plain((0..4).map(ring_quarter).collect::<Result<Vec<_>>>()?),
        "footprint12" => {
            let mut maps = Vec::with_capacity(12);
            for b in 0..3 {
                for a in 0..4 {
                    let g = GeometryMap::bilinear([
                        footprint_vertex(a, b),
                        footprint_vertex(a + 1, b),
                        footprint_vertex(a, b + 1),
                        footprint_vertex(a + 1, b + 1),
                    ]);
                    // rotated parameterizations produce reversed interfaces
                    maps.push(match (a + b) % 3 {
                        1 => g.reparameterized(ParamTransform::Rotate90),
                        2 => g.reparameterized(ParamTransform::Rotate180),
                        _ => g,
                    });
                }
            }
            DomainTemplate::plain(maps)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown built-in domain `{other}`; expected one of {}",
                BUILTIN_DOMAINS.join(", ")
            )))
        }
    };
    Ok(t)
}

/// Built-in domain at level `ℓ` with degree `p` and the given coefficients.
pub fn builtin_domain(name: &str, level: usize, degree: usize, alpha: &[f64]) -> Result<MultiPatchDomain> {
    builtin_template(name)?.with_alpha(alpha)?.discretize(level, degree)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchEntry {
    degrees: [usize; 2],
    intervals: [usize; 2],
    /// Control points row by row (x index fastest).
    control: Vec<[f64; 2]>,
    #[serde(default = "one")]
    alpha: f64,
    #[serde(default)]
    degree_offset: usize,
    #[serde(default = "one_usize")]
    refinement: usize,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterfaceEntry {
    k: usize,
    edge_k: String,
    l: usize,
    edge_l: String,
    orientation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    #[serde(default)]
    tolerance: Option<f64>,
    patch: Vec<PatchEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interface: Option<Vec<InterfaceEntry>>,
}

/// Parses a geometry file (TOML with `[[patch]]` and optional `[[interface]]` tables).
pub fn parse_geometry(text: &str) -> Result<DomainTemplate> {
    let file: GeometryFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.patch.is_empty() {
        return Err(Error::Parse("geometry file defines no patches".into()));
    }
    let mut patches = Vec::with_capacity(file.patch.len());
    for (k, p) in file.patch.iter().enumerate() {
        let space = TensorSplineSpace::new(
            SplineSpace1D::new(p.degrees[0], p.intervals[0])?,
            SplineSpace1D::new(p.degrees[1], p.intervals[1])?,
        );
        let control = p.control.iter().map(|c| v(c[0], c[1])).collect();
        let geometry = GeometryMap::new(space, control).map_err(|e| Error::Parse(format!("patch {k}: {e}")))?;
        if p.refinement == 0 {
            return Err(Error::Parse(format!("patch {k}: refinement must be at least 1")));
        }
        patches.push(PatchTemplate { geometry, alpha: p.alpha, degree_offset: p.degree_offset, refinement: p.refinement });
    }
    let interfaces = file
        .interface
        .map(|list| {
            list.into_iter()
                .map(|e| {
                    Ok(Interface {
                        k: e.k,
                        l: e.l,
                        edge_k: e.edge_k.parse::<Edge>()?,
                        edge_l: e.edge_l.parse::<Edge>()?,
                        orientation: e.orientation.parse::<Orientation>()?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok(DomainTemplate { patches, interfaces, tolerance: file.tolerance.unwrap_or(crate::topology::DEFAULT_TOLERANCE) })
}

pub fn load_geometry(path: &Path) -> Result<DomainTemplate> {
    let text = std::fs::read_to_string(path)?;
    parse_geometry(&text)
}

/// Serializes a template in the geometry file format.
pub fn write_geometry(template: &DomainTemplate) -> Result<String> {
    let file = GeometryFile {
        tolerance: Some(template.tolerance),
        patch: template
            .patches
            .iter()
            .map(|p| {
                let s = p.geometry.space();
                PatchEntry {
                    degrees: [s.x.degree(), s.y.degree()],
                    intervals: [s.x.intervals(), s.y.intervals()],
                    control: p.geometry.control_points().iter().map(|c| [c[0], c[1]]).collect(),
                    alpha: p.alpha,
                    degree_offset: p.degree_offset,
                    refinement: p.refinement,
                }
            })
            .collect(),
        interface: template.interfaces.as_ref().map(|list| {
            list.iter()
                .map(|i| InterfaceEntry {
                    k: i.k,
                    edge_k: i.edge_k.to_string(),
                    l: i.l,
                    edge_l: i.edge_l.to_string(),
                    orientation: match i.orientation {
                        Orientation::Same => "same".into(),
                        Orientation::Reversed => "reversed".into(),
                    },
                })
                .collect()
        }),
    };
    toml::to_string(&file).map_err(|e| Error::Internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ConstraintMode, DgSpace};

    #[test]
    fn all_builtins_build() {
        for name in BUILTIN_DOMAINS {
            let d = builtin_domain(name, 1, 2, &[]).unwrap();
            for p in &d.patches {
                assert!(p.geometry.estimate_regularity(12).unwrap().min_det > 0.0, "{name}");
            }
            assert!(!d.boundary.is_empty());
        }
        assert!(matches!(builtin_domain("teapot", 0, 2, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn expected_interface_counts() {
        let counts =
            [("square1", 1, 0), ("square2", 2, 1), ("strip2", 2, 1), ("lshape3", 3, 2), ("ring4", 4, 4), ("footprint12", 12, 17)];
        for (name, patches, interfaces) in counts {
            let d = builtin_domain(name, 0, 2, &[]).unwrap();
            assert_eq!((d.num_patches(), d.interfaces.len()), (patches, interfaces), "{name}");
        }
    }

    #[test]
    fn footprint_has_reversed_interfaces() {
        let d = builtin_domain("footprint12", 0, 2, &[]).unwrap();
        assert!(d.interfaces.iter().any(|i| i.orientation == Orientation::Reversed));
        assert!(d.interfaces.iter().any(|i| i.orientation == Orientation::Same));
    }

    #[test]
    fn square2_level0() {
        let d = builtin_domain("square2", 0, 2, &[]).unwrap();
        let s = DgSpace::build(&d, ConstraintMode::ZeroMean).unwrap();
        assert_eq!(s.dim(), 32);
        assert_eq!(d.interfaces.len(), 1);
    }

    #[test]
    fn nonmatching_square() {
        let d = builtin_domain("square2-nonmatch", 1, 3, &[]).unwrap();
        assert_eq!(d.patches[0].space.degree(), 3);
        assert_eq!(d.patches[1].space.degree(), 4);
        assert_eq!(d.patches[0].space.x.intervals(), 4);
        assert_eq!(d.patches[1].space.x.intervals(), 8);
        let m = d.mesh_quantities(4.0);
        assert_eq!((m.p, m.p_min), (4, 3));
    }

    #[test]
    fn alpha_assignment() {
        let d = builtin_domain("strip2", 0, 2, &[1.0, 1e6]).unwrap();
        assert_eq!(d.patches[1].alpha, 1e6);
        assert!(builtin_domain("strip2", 0, 2, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn geometry_file_round_trip() {
        let mut t = builtin_template("ring4").unwrap();
        let d0 = t.discretize(0, 2).unwrap();
        t.interfaces = Some(d0.interfaces.clone());
        let text = write_geometry(&t).unwrap();
        let back = parse_geometry(&text).unwrap();
        let d1 = back.discretize(0, 2).unwrap();
        assert_eq!(d0.interfaces, d1.interfaces);
        for (a, b) in d0.patches.iter().zip(&d1.patches) {
            assert_eq!(a.geometry, b.geometry);
        }
    }

    #[test]
    fn geometry_file_errors() {
        assert!(parse_geometry("").is_err());
        let bad_count = "[[patch]]\ndegrees = [1, 1]\nintervals = [1, 1]\ncontrol = [[0.0, 0.0]]\n";
        assert!(matches!(parse_geometry(bad_count), Err(Error::Parse(_))));
    }
}
