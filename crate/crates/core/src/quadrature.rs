//! Gauss–Legendre rules on `[0, 1]`, tensor rules per knot-span cell, and
//! merged rules along non-matching interfaces.

use crate::error::{Error, Result};
use crate::splines::{SplineSpace1D, TensorSplineSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The rule transplanted from `[0, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule1D {
        let len = b - a;
        QuadratureRule1D {
            nodes: self.nodes.iter().map(|t| a + len * t).collect(),
            weights: self.weights.iter().map(|w| w * len).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, w)| w * f(t)).sum()
    }
}

/// `n`-point Gauss–Legendre rule on `[0, 1]`, exact for polynomials of degree `2n - 1`.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule1D> {
    if n == 0 {
        return Err(Error::OutOfRange("a Gauss rule needs at least one point".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] → [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
    Ok(QuadratureRule1D { nodes, weights })
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor Gauss rules on every knot-span cell of a tensor spline space.
#[derive(Debug, Clone)]
pub struct ElementRule {
    /// Rule on each x-span, already mapped to the span.
    pub x: Vec<QuadratureRule1D>,
    /// Rule on each y-span, already mapped to the span.
    pub y: Vec<QuadratureRule1D>,
}

impl ElementRule {
    pub fn num_cells(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn points_per_cell(&self) -> usize {
        self.x.first().map_or(0, |r| r.len()) * self.y.first().map_or(0, |r| r.len())
    }

    /// Quadrature points `([x, y], weight)` of cell `(ix, iy)`, x running fastest.
    pub fn cell_points(&self, ix: usize, iy: usize) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        let (rx, ry) = (&self.x[ix], &self.y[iy]);
        ry.nodes
            .iter()
            .zip(&ry.weights)
            .flat_map(move |(&y, &wy)| rx.nodes.iter().zip(&rx.weights).map(move |(&x, &wx)| ([x, y], wx * wy)))
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        let mut sum = 0.0;
        for iy in 0..self.y.len() {
            for ix in 0..self.x.len() {
                sum += self.cell_points(ix, iy).map(|(q, w)| w * f(q)).sum::<f64>();
            }
        }
        sum
    }
}

fn span_rules(space: &SplineSpace1D, points: usize) -> Result<Vec<QuadratureRule1D>> {
    let base = gauss_rule(points)?;
    Ok((0..space.intervals())
        .map(|s| {
            let (a, b) = space.span_bounds(s);
            base.mapped(a, b)
        })
        .collect())
}

/// Per-cell tensor rule with `p + 1 + extra` points per direction.
pub fn element_rule(space: &TensorSplineSpace, extra: usize) -> Result<ElementRule> {
    Ok(ElementRule {
        x: span_rules(&space.x, space.x.degree() + 1 + extra)?,
        y: span_rules(&space.y, space.y.degree() + 1 + extra)?,
    })
}

/// Composite rule along an interface in the parameter `t` of the first side.
#[derive(Debug, Clone)]
pub struct InterfaceRule {
    pub segments: Vec<(f64, f64)>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub points_per_segment: usize,
}

impl InterfaceRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, w)| w * f(t)).sum()
    }
}

const KNOT_MERGE_TOL: f64 = 1e-13;

/// Rule whose segments are delimited by the knots of both sides of an interface.
///
/// `space_l` is expressed in its own parameter; with `reversed` its knot
/// `s` sits at `t = 1 - s` in the common parameter.
pub fn interface_rule(space_k: &SplineSpace1D, space_l: &SplineSpace1D, reversed: bool, extra: usize) -> Result<InterfaceRule> {
    let mut breaks: Vec<f64> = space_k.breakpoints();
    breaks.extend(space_l.breakpoints().into_iter().map(|s| if reversed { 1.0 - s } else { s }));
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup_by(|a, b| (*a - *b).abs() <= KNOT_MERGE_TOL);
    if breaks.len() < 2 {
        return Err(Error::Internal("interface knot union is empty".into()));
    }
    let points = (space_k.degree() + space_l.degree() + 2).div_ceil(2) + extra;
    let base = gauss_rule(points)?;
    let segments: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
    let mut nodes = Vec::with_capacity(segments.len() * points);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for &(a, b) in &segments {
        let r = base.mapped(a, b);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Ok(InterfaceRule { segments, nodes, weights, points_per_segment: points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn low_order_examples() {
        assert_abs_diff_eq!(gauss_rule(2).unwrap().integrate(|t| t * t), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gauss_rule(3).unwrap().integrate(|t| t.powi(5)), 1.0 / 6.0, epsilon = 1e-15);
        let mid = gauss_rule(1).unwrap();
        assert_eq!(mid.nodes, vec![0.5]);
        assert_abs_diff_eq!(mid.integrate(|t| t), 0.5);
        assert!(gauss_rule(0).is_err());
    }

    #[test]
    fn exactness_degree() {
        for n in 1..=10 {
            let r = gauss_rule(n).unwrap();
            assert_abs_diff_eq!(r.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            assert!(r.weights.iter().all(|w| *w > 0.0));
            assert!(r.nodes.iter().all(|t| *t > 0.0 && *t < 1.0));
            for d in 0..=2 * n - 1 {
                let err = (r.integrate(|t| t.powi(d as i32)) - 1.0 / (d as f64 + 1.0)).abs();
                assert!(err <= 1e-14, "n={n} d={d} err={err}");
            }
            let d = 2 * n;
            let err = (r.integrate(|t| t.powi(d as i32)) - 1.0 / (d as f64 + 1.0)).abs();
            assert!(err > 1e-16, "n={n} should not integrate degree {d} exactly");
        }
    }

    #[test]
    fn element_rule_counts_and_area() {
        let s = TensorSplineSpace::uniform(2, 2).unwrap();
        let r = element_rule(&s, 0).unwrap();
        assert_eq!(r.num_cells(), 4);
        assert_eq!(r.points_per_cell(), 9);
        assert_abs_diff_eq!(r.integrate(|_| 1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn element_rule_integrates_splines_like_oracle() {
        let s = TensorSplineSpace::uniform(3, 3).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let c: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = |q: [f64; 2]| s.eval_spline(&c, q, (0, 0)).unwrap();
        let fast = element_rule(&s, 0).unwrap().integrate(f);
        let oracle = ElementRule { x: span_rules(&s.x, 20).unwrap(), y: span_rules(&s.y, 20).unwrap() }.integrate(f);
        assert_abs_diff_eq!(fast, oracle, epsilon = 1e-13);
    }

    #[test]
    fn interface_segments() {
        let a = SplineSpace1D::new(2, 2).unwrap();
        let r = interface_rule(&a, &a, false, 0).unwrap();
        assert_eq!(r.segments, vec![(0.0, 0.5), (0.5, 1.0)]);
        assert_eq!(r.points_per_segment, 3);
        let b = SplineSpace1D::new(2, 3).unwrap();
        let r = interface_rule(&a, &b, false, 0).unwrap();
        let ends: Vec<f64> = r.segments.iter().map(|s| s.0).chain([1.0]).collect();
        let expect = [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0];
        for (x, y) in ends.iter().zip(expect) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
    }

    fn trace_product_check(reversed: bool) {
        let sk = SplineSpace1D::new(3, 4).unwrap();
        let sl = SplineSpace1D::new(2, 3).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let ck: Vec<f64> = (0..sk.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cl: Vec<f64> = (0..sl.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = |t: f64| {
            let s = if reversed { 1.0 - t } else { t };
            sk.eval_spline(&ck, t, 0).unwrap() * sl.eval_spline(&cl, s, 0).unwrap()
        };
        let rule = interface_rule(&sk, &sl, reversed, 0).unwrap();
        let oracle_base = gauss_rule(30).unwrap();
        let oracle: f64 = rule.segments.iter().map(|&(a, b)| oracle_base.mapped(a, b).integrate(f)).sum();
        assert_abs_diff_eq!(rule.integrate(f), oracle, epsilon = 1e-13);
    }

    #[test]
    fn interface_rule_exact_for_trace_products() {
        trace_product_check(false);
        trace_product_check(true);
    }

    #[test]
    fn reversed_breakpoints_are_mirrored() {
        let a = SplineSpace1D::new(2, 1).unwrap();
        let b = SplineSpace1D::new(2, 4).unwrap();
        let r = interface_rule(&a, &b, true, 0).unwrap();
        assert_eq!(r.segments.len(), 4);
    }
}
