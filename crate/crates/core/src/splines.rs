//! B-spline bases of maximum smoothness on uniform open knot vectors.
//!
//! A [`SplineSpace1D`] of degree `p` on `n` uniform intervals has the knot
//! vector `(0, …, 0, h, 2h, …, (n-1)h, 1, …, 1)` with `p + 1` repeated
//! end knots and simple interior knots, hence dimension `n + p` and global
//! smoothness `C^{p-1}`.
//!
//! Knot spans are half-open on the left, `(ih, (i+1)h]`, so an interior knot
//! belongs to the span on its left; `t = 0` is assigned to the first span.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Highest derivative order any evaluation routine hands out.
pub const MAX_DERIVATIVE: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpace1D {
    degree: usize,
    intervals: usize,
    knots: Vec<f64>,
}

/// The `p + 1` basis functions (or derivatives) that do not vanish on one knot span.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveBasis {
    pub first: usize,
    pub values: Vec<f64>,
}

impl SplineSpace1D {
    pub fn new(degree: usize, intervals: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("spline degree must be at least 1".into()));
        }
        if intervals == 0 {
            return Err(Error::Config("a spline space needs at least one interval".into()));
        }
        let h = 1.0 / intervals as f64;
        let mut knots = Vec::with_capacity(intervals + 2 * degree + 1);
        knots.extend(std::iter::repeat_n(0.0, degree + 1));
        knots.extend((1..intervals).map(|i| i as f64 * h));
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Ok(Self { degree, intervals, knots })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions, `n + p`.
    pub fn dim(&self) -> usize {
        self.intervals + self.degree
    }

    /// Grid size `h = 1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    /// The distinct knots `0, h, …, 1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.intervals).map(|i| self.breakpoint(i)).collect()
    }

    fn breakpoint(&self, i: usize) -> f64 {
        if i == self.intervals {
            1.0
        } else {
            i as f64 / self.intervals as f64
        }
    }

    /// End points of knot span `span`.
    pub fn span_bounds(&self, span: usize) -> (f64, f64) {
        (self.breakpoint(span), self.breakpoint(span + 1))
    }

    /// Index of the knot span containing `t` under the `(ih, (i+1)h]` convention.
    pub fn span_of(&self, t: f64) -> Result<usize> {
        check_unit(t)?;
        let n = self.intervals;
        let scaled = t * n as f64;
        let mut span = (scaled.ceil() as usize).clamp(1, n) - 1;
        // guard against rounding in t * n right at a knot
        while span > 0 && t <= self.breakpoint(span) {
            span -= 1;
        }
        while span + 1 < n && t > self.breakpoint(span + 1) {
            span += 1;
        }
        Ok(span)
    }

    /// Values (`deriv_order = 0`) or derivatives of the basis functions that are
    /// active on the span containing `t`.
    pub fn eval_basis(&self, t: f64, deriv_order: usize) -> Result<ActiveBasis> {
        if deriv_order > MAX_DERIVATIVE {
            return Err(Error::OutOfRange(format!("derivative order {deriv_order} exceeds {MAX_DERIVATIVE}")));
        }
        let span = self.span_of(t)?;
        let mut ders = self.ders_in_span(span, t, deriv_order);
        Ok(ActiveBasis { first: span, values: ders.swap_remove(deriv_order) })
    }

    /// All derivatives `0..=max_order` of the active basis on a known span.
    ///
    /// `ders[k][r]` is the `k`-th derivative of basis function `span + r`.
    /// Orders above the degree are identically zero. `t` is not range-checked.
    pub fn ders_in_span(&self, span: usize, t: f64, max_order: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let knots = &self.knots;
        let i = span + p;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = t - knots[i + 1 - j];
            right[j] = knots[i + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; max_order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let top = max_order.min(p);
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=top {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if rk >= 0 {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let col = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][col];
                    d += a[s2][j] * ndu[col][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for (k, row) in ders.iter_mut().enumerate().take(top + 1).skip(1) {
            for v in row.iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }

    /// Greville abscissae (knot averages), one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.dim()).map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64).collect()
    }

    /// Evaluates the spline `Σ c_i B_i` (or a derivative) at `t`.
    pub fn eval_spline(&self, coeffs: &[f64], t: f64, deriv_order: usize) -> Result<f64> {
        if coeffs.len() != self.dim() {
            return Err(Error::Config(format!("expected {} coefficients, got {}", self.dim(), coeffs.len())));
        }
        let active = self.eval_basis(t, deriv_order)?;
        Ok(active.values.iter().zip(&coeffs[active.first..]).map(|(b, c)| b * c).sum())
    }

    /// Spline interpolation of `values` given at the Greville abscissae.
    pub fn interpolate(&self, values: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if values.len() != n {
            return Err(Error::Config(format!("expected {n} interpolation values, got {}", values.len())));
        }
        let mut colloc = nalgebra::DMatrix::<f64>::zeros(n, n);
        for (row, &g) in self.greville().iter().enumerate() {
            let active = self.eval_basis(g, 0)?;
            for (r, v) in active.values.iter().enumerate() {
                colloc[(row, active.first + r)] = *v;
            }
        }
        let rhs = nalgebra::DVector::from_column_slice(values);
        colloc
            .lu()
            .solve(&rhs)
            .map(|c| c.as_slice().to_vec())
            .ok_or_else(|| Error::Internal("singular spline collocation matrix".into()))
    }
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("parameter {t} outside [0, 1]")))
    }
}

/// One of the four sides of the parameter square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    /// `x = 0`
    XMin,
    /// `x = 1`
    XMax,
    /// `y = 0`
    YMin,
    /// `y = 1`
    YMax,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::XMin, Edge::XMax, Edge::YMin, Edge::YMax];

    /// Parameterization of the edge by `t ∈ [0, 1]`: `(s, t)` on `x = s`, `(t, s)` on `y = s`.
    pub fn point(self, t: f64) -> [f64; 2] {
        match self {
            Edge::XMin => [0.0, t],
            Edge::XMax => [1.0, t],
            Edge::YMin => [t, 0.0],
            Edge::YMax => [t, 1.0],
        }
    }

    /// Parameter direction running along the edge (0 = x, 1 = y).
    pub fn tangent_axis(self) -> usize {
        match self {
            Edge::XMin | Edge::XMax => 1,
            Edge::YMin | Edge::YMax => 0,
        }
    }

    pub fn normal_axis(self) -> usize {
        1 - self.tangent_axis()
    }

    pub fn is_max_side(self) -> bool {
        matches!(self, Edge::XMax | Edge::YMax)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Edge::XMin => "x=0",
            Edge::XMax => "x=1",
            Edge::YMin => "y=0",
            Edge::YMax => "y=1",
        };
        f.write_str(s)
    }
}

impl FromStr for Edge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace(' ', "").to_ascii_lowercase().as_str() {
            "x=0" | "x0" | "xmin" | "west" => Ok(Edge::XMin),
            "x=1" | "x1" | "xmax" | "east" => Ok(Edge::XMax),
            "y=0" | "y0" | "ymin" | "south" => Ok(Edge::YMin),
            "y=1" | "y1" | "ymax" | "north" => Ok(Edge::YMax),
            other => Err(Error::Parse(format!("unknown edge tag `{other}`"))),
        }
    }
}

/// `S_x ⊗ S_y` with flat index `j * dim_x + i` for basis `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSplineSpace {
    pub x: SplineSpace1D,
    pub y: SplineSpace1D,
}

/// Active tensor basis at a point: flat indices and all partial derivatives up to order two.
#[derive(Debug, Clone)]
pub struct TensorBasisDerivatives {
    pub indices: Vec<usize>,
    /// `values[dx][dy][a]`, the `(dx, dy)` partial derivative of active function `a`.
    pub values: [[Vec<f64>; 3]; 3],
}

impl TensorSplineSpace {
    pub fn new(x: SplineSpace1D, y: SplineSpace1D) -> Self {
        Self { x, y }
    }

    /// Equal degree and interval count in both directions.
    pub fn uniform(degree: usize, intervals: usize) -> Result<Self> {
        let s = SplineSpace1D::new(degree, intervals)?;
        Ok(Self { x: s.clone(), y: s })
    }

    pub fn dim(&self) -> usize {
        self.x.dim() * self.y.dim()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.x.dim() + i
    }

    pub fn direction(&self, axis: usize) -> &SplineSpace1D {
        if axis == 0 {
            &self.x
        } else {
            &self.y
        }
    }

    /// Largest degree over both directions.
    pub fn degree(&self) -> usize {
        self.x.degree().max(self.y.degree())
    }

    /// Largest grid size over both directions.
    pub fn h(&self) -> f64 {
        self.x.h().max(self.y.h())
    }

    pub fn num_cells(&self) -> usize {
        self.x.intervals() * self.y.intervals()
    }

    pub fn eval_tensor_basis(&self, point: [f64; 2], deriv: (usize, usize)) -> Result<(Vec<usize>, Vec<f64>)> {
        let bx = self.x.eval_basis(point[0], deriv.0)?;
        let by = self.y.eval_basis(point[1], deriv.1)?;
        let mut indices = Vec::with_capacity(bx.values.len() * by.values.len());
        let mut values = Vec::with_capacity(indices.capacity());
        for (b, vy) in by.values.iter().enumerate() {
            for (a, vx) in bx.values.iter().enumerate() {
                indices.push(self.index(bx.first + a, by.first + b));
                values.push(vx * vy);
            }
        }
        Ok((indices, values))
    }

    /// All partial derivatives up to total order two at `point`.
    pub fn eval_derivatives(&self, point: [f64; 2]) -> Result<TensorBasisDerivatives> {
        let sx = self.x.span_of(point[0])?;
        let sy = self.y.span_of(point[1])?;
        Ok(self.derivatives_in_cell(sx, sy, point))
    }

    /// As [`Self::eval_derivatives`] with the knot spans given explicitly.
    pub fn derivatives_in_cell(&self, sx: usize, sy: usize, point: [f64; 2]) -> TensorBasisDerivatives {
        let dx = self.x.ders_in_span(sx, point[0], MAX_DERIVATIVE);
        let dy = self.y.ders_in_span(sy, point[1], MAX_DERIVATIVE);
        tensor_combine(self, sx, sy, &dx, &dy)
    }

    /// Flat indices of the basis functions whose trace on `edge` is nonzero,
    /// ordered along the edge. The trace of the tensor spline is the univariate
    /// spline in the along-edge direction with these coefficients.
    pub fn boundary_trace_indices(&self, edge: Edge) -> Vec<usize> {
        let (nx, ny) = (self.x.dim(), self.y.dim());
        match edge {
            Edge::XMin => (0..ny).map(|j| self.index(0, j)).collect(),
            Edge::XMax => (0..ny).map(|j| self.index(nx - 1, j)).collect(),
            Edge::YMin => (0..nx).map(|i| self.index(i, 0)).collect(),
            Edge::YMax => (0..nx).map(|i| self.index(i, ny - 1)).collect(),
        }
    }

    /// The univariate space running along `edge`.
    pub fn edge_space(&self, edge: Edge) -> &SplineSpace1D {
        self.direction(edge.tangent_axis())
    }

    /// Evaluates `Σ c_k φ_k` (or a partial derivative) at a parameter point.
    pub fn eval_spline(&self, coeffs: &[f64], point: [f64; 2], deriv: (usize, usize)) -> Result<f64> {
        if coeffs.len() != self.dim() {
            return Err(Error::Config(format!("expected {} coefficients, got {}", self.dim(), coeffs.len())));
        }
        let (idx, vals) = self.eval_tensor_basis(point, deriv)?;
        Ok(idx.iter().zip(&vals).map(|(&i, v)| coeffs[i] * v).sum())
    }
}

pub(crate) fn tensor_combine(
    space: &TensorSplineSpace,
    sx: usize,
    sy: usize,
    dx: &[Vec<f64>],
    dy: &[Vec<f64>],
) -> TensorBasisDerivatives {
    let (px, py) = (space.x.degree(), space.y.degree());
    let count = (px + 1) * (py + 1);
    let mut indices = Vec::with_capacity(count);
    for b in 0..=py {
        for a in 0..=px {
            indices.push(space.index(sx + a, sy + b));
        }
    }
    let mut values: [[Vec<f64>; 3]; 3] = Default::default();
    for (ox, row) in values.iter_mut().enumerate() {
        for (oy, slot) in row.iter_mut().enumerate() {
            if ox + oy > MAX_DERIVATIVE {
                continue;
            }
            let mut v = Vec::with_capacity(count);
            for b in 0..=py {
                for a in 0..=px {
                    v.push(dx[ox][a] * dy[oy][b]);
                }
            }
            *slot = v;
        }
    }
    TensorBasisDerivatives { indices, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    /// Direct Cox–de Boor recurrence on the full knot vector, one function at a time.
    fn naive_basis(knots: &[f64], i: usize, p: usize, t: f64) -> f64 {
        if p == 0 {
            let last = knots.len() - 1;
            // last non-degenerate span is closed on the right
            let closes = t == knots[last] && knots[i + 1] == knots[last] && knots[i] < knots[i + 1];
            return if (knots[i] <= t && t < knots[i + 1]) || closes { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 > 0.0 {
            v += (t - knots[i]) / d1 * naive_basis(knots, i, p - 1, t);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 > 0.0 {
            v += (knots[i + p + 1] - t) / d2 * naive_basis(knots, i + 1, p - 1, t);
        }
        v
    }

    #[test]
    fn hat_function_peak() {
        let s = SplineSpace1D::new(1, 2).unwrap();
        let b = s.eval_basis(0.5, 0).unwrap();
        // half-open spans: 0.5 is in the first span, functions 0 and 1 active
        assert_eq!(b.first, 0);
        assert_abs_diff_eq!(b.values[0], 0.0);
        assert_abs_diff_eq!(b.values[1], 1.0);
    }

    #[test]
    fn quadratic_midpoint_matches_recurrence() {
        let s = SplineSpace1D::new(2, 2).unwrap();
        let b = s.eval_basis(0.5, 0).unwrap();
        let mut full = vec![0.0; s.dim()];
        for (r, v) in b.values.iter().enumerate() {
            full[b.first + r] = *v;
        }
        let oracle: Vec<f64> = (0..4).map(|i| naive_basis(s.knots(), i, 2, 0.5)).collect();
        assert_eq!(oracle, vec![0.0, 0.5, 0.5, 0.0]);
        for (a, b) in full.iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn matches_naive_recurrence_everywhere() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for p in 1..=6 {
            for n in [1, 2, 3, 5] {
                let s = SplineSpace1D::new(p, n).unwrap();
                for _ in 0..50 {
                    let t: f64 = rng.gen();
                    let b = s.eval_basis(t, 0).unwrap();
                    for i in 0..s.dim() {
                        let got = if i >= b.first && i <= b.first + p { b.values[i - b.first] } else { 0.0 };
                        assert_abs_diff_eq!(got, naive_basis(s.knots(), i, p, t), epsilon = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = rng.gen_range(1..=8);
            let n = rng.gen_range(1..=20);
            let s = SplineSpace1D::new(p, n).unwrap();
            let t: f64 = rng.gen();
            let sum: f64 = s.eval_basis(t, 0).unwrap().values.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-13, "p={p} n={n} t={t} sum={sum}");
            let dsum: f64 = s.eval_basis(t, 1).unwrap().values.iter().sum();
            assert!(dsum.abs() <= 1e-10 * n as f64 * p as f64);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let delta = 1e-5;
        for p in 2..=5 {
            let s = SplineSpace1D::new(p, 4).unwrap();
            for &t in &[0.1, 0.37, 0.6, 0.93] {
                let span = s.span_of(t).unwrap();
                let d = s.ders_in_span(span, t, 2);
                let plus = s.ders_in_span(span, t + delta, 0);
                let minus = s.ders_in_span(span, t - delta, 0);
                let dplus = s.ders_in_span(span, t + delta, 1);
                let dminus = s.ders_in_span(span, t - delta, 1);
                for r in 0..=p {
                    let fd = (plus[0][r] - minus[0][r]) / (2.0 * delta);
                    assert!((fd - d[1][r]).abs() <= 1e-6 * d[1][r].abs().max(1.0));
                    let fd2 = (dplus[1][r] - dminus[1][r]) / (2.0 * delta);
                    assert!((fd2 - d[2][r]).abs() <= 1e-6 * d[2][r].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn continuity_across_interior_knots() {
        for p in 2..=5 {
            let s = SplineSpace1D::new(p, 4).unwrap();
            for k in 1..4 {
                let t = k as f64 / 4.0;
                let left = s.ders_in_span(k - 1, t, 1);
                let right = s.ders_in_span(k, t, 1);
                // align the windows: span k-1 covers functions k-1..k-1+p, span k covers k..k+p
                let mut l = vec![[0.0; 2]; s.dim()];
                let mut r = vec![[0.0; 2]; s.dim()];
                for a in 0..=p {
                    l[k - 1 + a] = [left[0][a], left[1][a]];
                    r[k + a] = [right[0][a], right[1][a]];
                }
                for i in 0..s.dim() {
                    assert_abs_diff_eq!(l[i][0], r[i][0], epsilon = 1e-12);
                    assert_abs_diff_eq!(l[i][1], r[i][1], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn derivative_orders_above_degree_vanish() {
        let s = SplineSpace1D::new(1, 3).unwrap();
        let d = s.ders_in_span(1, 0.5, 2);
        assert!(d[2].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn end_parameter_uses_last_span() {
        let s = SplineSpace1D::new(3, 5).unwrap();
        assert_eq!(s.span_of(1.0).unwrap(), 4);
        assert_eq!(s.span_of(0.0).unwrap(), 0);
        assert_eq!(s.span_of(0.4).unwrap(), 1);
        let b = s.eval_basis(1.0, 0).unwrap();
        assert_abs_diff_eq!(*b.values.last().unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn out_of_range_parameter() {
        let s = SplineSpace1D::new(2, 2).unwrap();
        assert!(matches!(s.eval_basis(1.5, 0), Err(Error::OutOfRange(_))));
        assert!(matches!(s.eval_basis(-1e-9, 0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn tensor_partition_and_derivative() {
        let t = TensorSplineSpace::uniform(3, 4).unwrap();
        let (_, v) = t.eval_tensor_basis([0.3, 0.8], (0, 0)).unwrap();
        assert_eq!(v.len(), 16);
        assert_abs_diff_eq!(v.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        let (_, d) = t.eval_tensor_basis([0.3, 0.8], (1, 0)).unwrap();
        assert_abs_diff_eq!(d.iter().sum::<f64>(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn tensor_is_outer_product_of_univariate() {
        let t = TensorSplineSpace::uniform(2, 2).unwrap();
        let (idx, v) = t.eval_tensor_basis([0.5, 0.5], (0, 0)).unwrap();
        let uni: Vec<f64> = (0..4).map(|i| naive_basis(t.x.knots(), i, 2, 0.5)).collect();
        for (k, &flat) in idx.iter().enumerate() {
            let (i, j) = (flat % 4, flat / 4);
            assert_abs_diff_eq!(v[k], uni[i] * uni[j], epsilon = 1e-15);
        }
    }

    #[test]
    fn trace_indices() {
        let t = TensorSplineSpace::uniform(2, 2).unwrap();
        assert_eq!(t.boundary_trace_indices(Edge::XMin), vec![0, 4, 8, 12]);
        assert_eq!(t.boundary_trace_indices(Edge::YMin), vec![0, 1, 2, 3]);
        assert_eq!(t.boundary_trace_indices(Edge::XMax), vec![3, 7, 11, 15]);
        assert_eq!(t.boundary_trace_indices(Edge::YMax), vec![12, 13, 14, 15]);
    }

    #[test]
    fn edge_trace_is_univariate_basis() {
        let t = TensorSplineSpace::uniform(2, 3).unwrap();
        let trace = t.boundary_trace_indices(Edge::XMin);
        for (j, &flat) in trace.iter().enumerate() {
            let mut c = vec![0.0; t.dim()];
            c[flat] = 1.0;
            for &s in &[0.1, 0.45, 0.77, 1.0] {
                let v = t.eval_spline(&c, [0.0, s], (0, 0)).unwrap();
                assert_abs_diff_eq!(v, naive_basis(t.y.knots(), j, 2, s), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn greville_interpolation_reproduces_splines() {
        let s = SplineSpace1D::new(3, 5).unwrap();
        let coeffs: Vec<f64> = (0..s.dim()).map(|i| (i as f64 * 0.7).sin()).collect();
        let vals: Vec<f64> = s.greville().iter().map(|&g| s.eval_spline(&coeffs, g, 0).unwrap()).collect();
        let back = s.interpolate(&vals).unwrap();
        for (a, b) in back.iter().zip(&coeffs) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn edge_tags_round_trip() {
        for e in Edge::ALL {
            assert_eq!(e.to_string().parse::<Edge>().unwrap(), e);
        }
        assert!("z=0".parse::<Edge>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #[test]
            fn active_window_equals_full_summation(p in 1usize..6, n in 1usize..8, t in 0.0f64..=1.0, seed in 0u64..1000) {
                let s = SplineSpace1D::new(p, n).unwrap();
                let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
                let c: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let fast = s.eval_spline(&c, t, 0).unwrap();
                let dense: f64 = (0..s.dim()).map(|i| c[i] * naive_basis(s.knots(), i, p, t)).sum();
                prop_assert!((fast - dense).abs() <= 1e-12);
            }
        }
    }
}
