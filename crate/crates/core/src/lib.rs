//! Spectral Galerkin machinery for time-periodic solutions of
//! `u_tt - u_xx + f(x, u) = 0` on `[0, pi] x [0, 2 pi]` with periodic
//! boundary conditions, together with executable checks of the linear and
//! nonlinear a priori estimates that govern them.

pub mod boxop;
pub mod error;
mod fft;
pub mod lattice;
pub mod model;
pub mod norms;
pub mod scalar;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{
    analyze, grid_for_radius, kernel_profiles, refined_grid, sup_norm, synthesize, Decomposition,
    FourierField, GridField, KernelProfile, ModeClass, ModeIndex, Part, Quadrant, Transform,
};
pub use scalar::Real;

/// Double-precision field, the default working type.
pub type Field = FourierField<f64>;
/// Double-precision grid samples.
pub type Grid = GridField<f64>;
/// Double-precision decomposition.
pub type Split = Decomposition<f64>;
