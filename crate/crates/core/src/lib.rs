//! Multipatch isogeometric analysis for the Poisson problem with patchwise
//! constant diffusion coefficients.
//!
//! Every patch carries its own tensor-product B-spline space. Patches are
//! coupled weakly across interfaces by the symmetric interior penalty
//! discontinuous Galerkin (SIPG) method, so neighbouring patches may use
//! different grid sizes and spline degrees.
//!
//! The crate is organised bottom-up:
//!
//! * [`splines`]: univariate and tensor-product B-spline bases on uniform open knot vectors
//! * [`quadrature`]: Gauss–Legendre element and interface rules
//! * [`geometry`]: spline geometry maps, Jacobians, normals and point inversion
//! * [`topology`]: multipatch domains, interface discovery and orientation
//! * [`space`]: the discontinuous multipatch space and discrete fields
//! * [`assembly`]: SIPG system, load vector and dG-norm Gram matrices
//! * [`solver`]: sparse LDLᵀ, conjugate gradients, generalized Rayleigh extremes
//! * [`analysis`]: error norms, spline projectors and convergence rates
//! * [`harness`]: built-in domains, manufactured solutions, studies and verification

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod sparse;
pub mod splines;
pub mod topology;

pub use error::{Error, Result};
