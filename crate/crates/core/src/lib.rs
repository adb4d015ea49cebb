//! Enriched Galerkin (EG) discretization of the 2D Stokes equations.
//!
//! The velocity space is the vector-valued continuous piecewise-linear space
//! enriched with one discontinuous, mean-zero linear vector function per
//! cell; the pressure space is piecewise constant. The weak form is the
//! standard interior-penalty form with symmetrization parameter
//! `theta in {-1, 0, 1}` (SIPG / IIPG / NIPG) and penalty `alpha`.
//!
//! The crate is organized as:
//!
//! - [`mesh`]: triangulations of the unit square, mesh import, facet
//!   topology with oriented normals,
//! - [`space`]: DOF layout, basis evaluation, discrete norms and errors,
//! - [`assembly`]: sparse blocks of the saddle-point system,
//! - [`linsolve`]: CSR kernels, flexible GMRES, Jacobi smoothing and
//!   smoothed-aggregation AMG,
//! - [`precond`]: block diagonal/triangular preconditioners,
//! - [`harness`]: experiment drivers (convergence studies, solver studies,
//!   channel flow, inf-sup estimation) and VTK/CSV output.

pub mod assembly;
pub mod error;
pub mod harness;
pub mod linsolve;
pub mod mesh;
pub mod precond;
pub mod quadrature;
pub mod space;

pub use error::Error;
