//! Ground-state overlaps of the open XXZ spin-1/2 chain under a change of
//! one boundary field.
//!
//! The crate computes the same quantity four ways: by exact diagonalisation
//! ([`ed`]), from Bethe roots through Slavnov/Gaudin determinant ratios
//! ([`bethe`], [`overlap`]), through the finite-size product formula, and
//! in closed form in the thermodynamic limit ([`thermo`]).

pub mod bethe;
pub mod cli;
pub mod ed;
pub mod overlap;
pub mod pipeline;
pub mod selftest;
pub mod linalg;
pub mod model;
pub mod specialfns;
pub mod thermo;

pub use specialfns::C64;
