//! Numerical toolkit for causal fermion systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] and [`spectral`]: dense complex matrices and eigensolvers.
//! * [`system`]: operator points, the causal Lagrangian, action and constraints.
//! * [`optimize`]: minimizing the causal action over finitely supported measures.
//! * [`discrete`]: the variational principle on a finite indefinite inner product space.
//! * [`sea`]: the regularized Dirac sea on a momentum lattice.
//! * [`perturbation`]: resolvent series and the contour-integral sea projector.
//! * [`lightcone`]: ordered exponentials and line integrals along segments.

pub mod discrete;
pub mod error;
pub mod lightcone;
pub mod linalg;
pub mod optimize;
pub mod par;
pub mod perturbation;
pub mod quadrature;
pub mod random;
pub mod sea;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
