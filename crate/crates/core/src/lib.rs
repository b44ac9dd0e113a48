//! Exact simulation of the two-dimensional two-state alternate-coin quantum
//! walk `U = S₂C₂S₁C₁` on ℤ², together with the analytic weak-limit density
//! of `X_t / t` and a harness that checks the two against each other.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: coin parameters and every constant derived from them.
//! - [`lattice`]: dense evolution of the walker state and position statistics.
//! - [`spectral`]: Bloch matrix, eigen-decomposition, group velocities and
//!   torus quadrature.
//! - [`limit`]: the velocity map, its support, Jacobians, branch inverses and
//!   the limit density.
//! - [`verify`]: cross-validation checks producing [`verify::ComparisonReport`]s.

pub mod angle;
pub mod error;
pub mod lattice;
pub mod limit;
pub mod model;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{LatticeState, PositionDistribution, ShiftAxis, Spinor, Window};
pub use limit::{Branch, Shape, UPoint, VelocityPoint};
pub use model::{CoinParameters, DerivedConstants, Model};
pub use spectral::{EigenSystem, InitialSpectrum, Wavenumber};
