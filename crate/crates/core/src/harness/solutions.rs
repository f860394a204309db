//! Manufactured solutions with analytic gradients and Hessians.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Jet, Mat2, Vec2};
use crate::space::PatchFunction;

pub const BUILTIN_SOLUTIONS: [&str; 4] = ["sine", "alpha-jump", "poly", "cosine"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionId {
    /// `sin(πx) sin(πy)`.
    Sine,
    /// `sin(πx) / α_k` on patch `k`; continuous with continuous flux across `x = 1`.
    AlphaJump,
    /// `x²y² + x`, contained in every tensor space of degree at least two on affine patches.
    Poly,
    /// `cos(πx) cos(πy)`: zero mean and zero normal flux on unit-aligned rectangles.
    Cosine,
}

impl std::str::FromStr for SolutionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sine" => Ok(SolutionId::Sine),
            "alpha-jump" | "alpha_jump" => Ok(SolutionId::AlphaJump),
            "poly" => Ok(SolutionId::Poly),
            "cosine" => Ok(SolutionId::Cosine),
            other => Err(Error::Config(format!("unknown solution `{other}`; expected one of {}", BUILTIN_SOLUTIONS.join(", ")))),
        }
    }
}

/// An exact solution `u` of `−div(α_k ∇u) = f` with its data.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedSolution {
    pub id: SolutionId,
    /// Patch coefficients `α_k`.
    pub alpha: Vec<f64>,
}

impl ManufacturedSolution {
    pub fn new(id: SolutionId, alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() || alpha.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Config("solution needs positive patch coefficients".into()));
        }
        Ok(Self { id, alpha })
    }

    fn alpha_of(&self, patch: usize) -> f64 {
        self.alpha[patch.min(self.alpha.len() - 1)]
    }

    pub fn value(&self, patch: usize, x: Vec2) -> f64 {
        self.jet(patch, x).value
    }

    /// `f = −α_k Δu`.
    pub fn source(&self, patch: usize, x: Vec2) -> f64 {
        -self.alpha_of(patch) * self.jet(patch, x).hess.trace()
    }

    /// Dirichlet data `g = u` on the boundary.
    pub fn boundary(&self, patch: usize, x: Vec2) -> f64 {
        self.value(patch, x)
    }
}

impl PatchFunction for ManufacturedSolution {
    fn jet(&self, patch: usize, x: Vec2) -> Jet {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let pi2 = PI * PI;
        match self.id {
            SolutionId::Sine => Jet {
                value: sx * sy,
                grad: Vec2::new(PI * cx * sy, PI * sx * cy),
                hess: Mat2::new(-pi2 * sx * sy, pi2 * cx * cy, pi2 * cx * cy, -pi2 * sx * sy),
            },
            SolutionId::AlphaJump => {
                let a = self.alpha_of(patch);
                Jet { value: sx / a, grad: Vec2::new(PI * cx / a, 0.0), hess: Mat2::new(-pi2 * sx / a, 0.0, 0.0, 0.0) }
            }
            SolutionId::Poly => {
                let (x, y) = (x[0], x[1]);
                Jet {
                    value: x * x * y * y + x,
                    grad: Vec2::new(2.0 * x * y * y + 1.0, 2.0 * x * x * y),
                    hess: Mat2::new(2.0 * y * y, 4.0 * x * y, 4.0 * x * y, 2.0 * x * x),
                }
            }
            SolutionId::Cosine => Jet {
                value: cx * cy,
                grad: Vec2::new(-PI * sx * cy, -PI * cx * sy),
                hess: Mat2::new(-pi2 * cx * cy, pi2 * sx * sy, pi2 * sx * sy, -pi2 * cx * cy),
            },
        }
    }
}

/// Solution `id` with coefficients `alpha` (one per patch, or one for all).
pub fn builtin_solution(id: &str, alpha: Vec<f64>) -> Result<ManufacturedSolution> {
    ManufacturedSolution::new(id.parse()?, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn all(alpha: Vec<f64>) -> Vec<ManufacturedSolution> {
        BUILTIN_SOLUTIONS.iter().map(|id| builtin_solution(id, alpha.clone()).unwrap()).collect()
    }

    #[test]
    fn sine_center_value() {
        let s = builtin_solution("sine", vec![1.0]).unwrap();
        assert_abs_diff_eq!(s.value(0, Vec2::new(0.5, 0.5)), 1.0, epsilon = 1e-15);
        assert!(builtin_solution("bessel", vec![1.0]).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        let eps = 1e-5;
        for s in all(vec![1.0, 7.0]) {
            for _ in 0..100 {
                let k = rng.gen_range(0..2);
                let x = Vec2::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..1.0));
                let j = s.jet(k, x);
                for d in 0..2 {
                    let mut e = Vec2::zeros();
                    e[d] = eps;
                    let (p, m) = (s.jet(k, x + e), s.jet(k, x - e));
                    assert_abs_diff_eq!((p.value - m.value) / (2.0 * eps), j.grad[d], epsilon = 1e-7);
                    let col = (p.grad - m.grad) / (2.0 * eps);
                    assert_abs_diff_eq!(col[0], j.hess[(0, d)], epsilon = 1e-6);
                    assert_abs_diff_eq!(col[1], j.hess[(1, d)], epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn pde_holds_by_finite_differences() {
        // −α Δu by a five-point stencil against the source
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        let h = 1e-4;
        for s in all(vec![1.0, 1e3]) {
            for _ in 0..100 {
                let k = rng.gen_range(0..2);
                let x = Vec2::new(rng.gen_range(0.1..1.9), rng.gen_range(0.1..0.9));
                let u = |dx: f64, dy: f64| s.value(k, x + Vec2::new(dx, dy));
                let lap = (u(h, 0.0) + u(-h, 0.0) + u(0.0, h) + u(0.0, -h) - 4.0 * u(0.0, 0.0)) / (h * h);
                let f = s.source(k, x);
                let fd = -s.alpha[k] * lap;
                assert!((fd - f).abs() <= 1e-5 * f.abs().max(1.0), "{:?}: {fd} vs {f}", s.id);
            }
        }
    }

    #[test]
    fn alpha_jump_interface_conditions() {
        let s = builtin_solution("alpha-jump", vec![1.0, 1e6]).unwrap();
        for i in 0..=20 {
            let x = Vec2::new(1.0, i as f64 / 20.0);
            let (a, b) = (s.jet(0, x), s.jet(1, x));
            assert!((a.value - b.value).abs() <= 1e-10);
            assert!((1.0 * a.grad[0] - 1e6 * b.grad[0]).abs() <= 1e-10 * a.grad[0].abs());
            assert_abs_diff_eq!(a.grad[0], -PI, epsilon = 1e-12);
        }
        // the source does not depend on the patch
        assert_abs_diff_eq!(s.source(0, Vec2::new(0.3, 0.2)), s.source(1, Vec2::new(0.3, 0.2)), epsilon = 1e-9);
    }

    #[test]
    fn cosine_has_zero_normal_flux_on_unit_square() {
        let s = builtin_solution("cosine", vec![1.0]).unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            assert!(s.jet(0, Vec2::new(0.0, t)).grad[0].abs() < 1e-14);
            assert!(s.jet(0, Vec2::new(1.0, t)).grad[0].abs() < 1e-14);
            assert!(s.jet(0, Vec2::new(t, 1.0)).grad[1].abs() < 1e-14);
        }
    }
}
