//! Numerical laboratory for the regional (Neumann) and censored (Dirichlet)
//! fractional Laplacians on intervals and the half-line, together with the
//! weighted half-plane extension that characterizes their boundary behaviour.

pub mod angular;
pub mod constants;
pub mod error;
pub mod extension;
pub mod field;
pub mod galerkin;
pub mod mesh;
pub mod operator;
pub mod probe;
pub mod quadrature;

pub use constants::{FracOrder, Regime};
pub use error::{Error, Result};
pub use field::{omega_gamma, PowerLaw, ScalarField};
pub use mesh::{Domain1D, GradedMesh};
pub use quadrature::Estimate;
pub use galerkin::{BoundaryCondition, SolveResult};
