//! Heterogeneous porous scaffold generation inside trivariate B-spline solids.
//!
//! The pipeline this crate implements:
//!
//! 1. Model a solid as a trivariate B-spline volume ([`spline::TrivariateBSplineSolid`])
//!    whose parameter domain is the unit cube.
//! 2. Design a threshold distribution field (TDF) over that domain, either by
//!    diffusing boundary curvature into the interior, by layer assignment, or
//!    from a prescribed function ([`tdf`]), then compress it into a trivariate
//!    B-spline scalar field with LSPIA fitting ([`lspia`]).
//! 3. Polygonize a triply periodic minimal surface (TPMS) structure whose local
//!    threshold comes from the TDF ([`polygonize`]), close it against the
//!    domain boundary, and map the triangles into physical space through the
//!    solid ([`mapper`]).
//! 4. Persist the compact TDF representation and the triangle meshes ([`io`]),
//!    and measure porosity and mesh quality ([`analysis`]).

pub mod analysis;
pub mod error;
pub mod grid;
pub mod io;
pub mod knots;
pub mod lspia;
pub mod mapper;
pub mod mesh;
pub mod polygonize;
pub mod spline;
pub mod tdf;
pub mod tpms;

pub use error::{Error, Result};
pub use grid::Grid3;
pub use knots::KnotVector;
pub use spline::{Face, TrivariateBSplineSolid, TrivariateScalarField};
pub use tpms::{ImplicitFieldSpec, PeriodCoefficients, StructureKind, TpmsType};
