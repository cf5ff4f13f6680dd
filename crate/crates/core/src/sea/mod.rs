//! Regularized Dirac sea on a momentum lattice.

pub mod continuum;
pub mod gamma;
pub mod lattice;
pub mod sectors;
pub mod sweep;
pub mod vacuum;
