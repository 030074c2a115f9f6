//! Radial standing waves of a Chern–Simons–Schrödinger system on the plane.
//!
//! The crate discretizes the reduced energy functional
//! `J_ε(u) = ½‖u‖²_{H¹} + (λ/2) c(u) − ∫F(u) − ε∫k u` on a radial grid and
//! provides mountain-pass and constrained-minimization solvers for its
//! critical points, together with numerical probes for the inequalities the
//! existence theory relies on.

pub mod analysis;
pub mod chern_simons;
pub mod cli;
pub mod error;
pub mod functional;
pub mod grid;
pub mod nonlinearity;
pub mod solvers;

pub use error::{Error, Result};
pub use functional::{ProblemSpec, Tolerances};
pub use grid::{make_grid, GridField, RadialFunction, RadialGrid};
pub use nonlinearity::{NonlinearityKind, NonlinearityModel};
pub use solvers::{Solution, SolutionKind};
