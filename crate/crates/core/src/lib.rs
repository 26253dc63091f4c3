//! Vectorial lattice Boltzmann solver for two-dimensional linear elastodynamics.
//!
//! Four vector-valued populations per node (the D2Q4 stencil with five
//! components each) evolve by BGK collision and streaming. Their zeroth
//! moment approximates the first-order system for velocity and scaled
//! displacement gradients; displacement follows by trapezoidal integration
//! of the velocity.

pub mod boundary;
pub mod error;
pub mod grid;
pub mod initcond;
pub mod kernel;
pub mod mms;
pub mod model;
pub mod postprocess;
pub mod stabmon;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{build_lattice, BoundaryMode, Lattice, Link};
pub use kernel::{NoSources, PopulationField, Solver, Sources};
pub use mms::{case_by_name, ManufacturedCase};
pub use model::{Material, State};
