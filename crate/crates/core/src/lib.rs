//! Finite adaptability (k-adaptability) for two-stage robust linear programs
//! whose uncertainty set is a polytope given by its vertices.
//!
//! The crate contains a self-contained dense LP/MILP kernel ([`lp`]), polytope
//! face lattices ([`geometry`]), the problem model ([`model`]), skeleton-cover
//! enumeration ([`covers`]), the solvers ([`solvers`]), an independent
//! cover-verification oracle ([`verify`]), a built-in instance library
//! ([`corpus`]), JSON file formats ([`io`]) and SVG rendering ([`render`]).

pub mod corpus;
pub mod covers;
pub mod error;
pub mod geometry;
pub mod io;
pub mod lp;
pub mod model;
pub mod render;
pub mod solvers;
pub mod tolerances;
pub mod verify;

pub use error::{FormatError, GeometryError, LpError, ModelError, RenderError, SolveError, VerifyError};
pub use geometry::Polytope;
pub use model::{AffineMap, Bounds, Instance, Method, Solution};
pub use tolerances::Tolerances;
