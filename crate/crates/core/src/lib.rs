//! Numerical solver and verifier for the Christoffel problem for uniformly
//! h-convex hypersurfaces in hyperbolic space H^{n+1}.
//!
//! The unknown is φ = e^u, with u the horospherical support function, and
//! the equation on S^n is
//!
//! ```text
//! Δφ − (n/2)|Dφ|²/φ + (n/2)(φ − 1/φ) = f/φ,
//! U[φ] = D²φ − ½(|Dφ|²/φ) I + ½(φ − 1/φ) I  positive definite.
//! ```
//!
//! Modules, bottom up:
//!
//! - [`sphere_grid`]: grids on S^n, spectral derivatives, quadrature.
//! - [`symmetric_functions`]: σ_k of symmetric matrices and derivatives.
//! - [`equation`]: residual, U[φ], linearization, admissibility of f.
//! - [`solver`]: Newton–Krylov in the even subspace with homotopy continuation.
//! - [`geometry`]: the hypersurface in the hyperboloid model and its curvatures.
//! - [`estimates`]: a priori bounds evaluated as runtime certificates.
//! - [`nirenberg`]: change of variables to the prescribed scalar curvature equation.
//! - [`expr`]: a small expression language for prescribed data.

pub mod error;
pub mod exec;
pub mod sphere_grid;
pub mod equation;
pub mod estimates;
pub mod expr;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod nirenberg;
pub mod solver;
pub mod symmetric_functions;

pub use error::{Error, Result};
pub use exec::Exec;
pub use sphere_grid::{build_grid, FrameMatrix, Grid, GridMode, SphericalField};
