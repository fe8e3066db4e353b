//! Criticality theory for Schrödinger operators on weighted graphs: Green
//! functions, Hardy weights, lattice resolvent asymptotics, fractional
//! Laplacian weights, and Landis-type hypothesis checks on finite truncations.

pub mod builders;
pub mod error;
pub mod exec;
pub mod fractional;
pub mod graph;
pub mod hardy;
pub mod io;
pub mod landis;
pub mod lattice_norms;
pub mod linalg;
pub mod quadrature;
pub mod regression;
pub mod resolvent;
pub mod special;

pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{Potential, VertexFunction, VertexLabels, WeightedGraph};
