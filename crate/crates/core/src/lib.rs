//! Energy-stable reduced-order modelling for the 2D Allen-Cahn equation.
//!
//! The crate solves the parametrized Allen-Cahn equation
//! `u_t = eps * lap(u) - f(u)` on rectangular domains with a symmetric
//! interior penalty (SIPG) discontinuous Galerkin discretization in space
//! and the average vector field (AVF) method in time. The full-order
//! solver decreases the discrete Ginzburg-Landau energy unconditionally;
//! the reduced-order pipeline (POD-greedy sampling plus DEIM
//! hyper-reduction of the nonlinearity) inherits that property
//! conditionally, and the [`deim`] module evaluates the time-step bounds
//! that certify it.
//!
//! Module map:
//! - [`mesh`], [`space`], [`assembly`]: triangulation, dG space and SIPG
//!   operator assembly (mass matrix, unit-diffusivity stiffness,
//!   nonlinear vectors, discrete energy).
//! - [`potential`]: quartic and logarithmic potentials and the AVF line
//!   integral of their derivative.
//! - [`avf`]: implicit AVF time stepping with Newton's method, shared by
//!   the full-order and reduced systems.
//! - [`pod`], [`rom`]: weighted POD bases and the Galerkin reduced model.
//! - [`deim`]: discrete empirical interpolation and energy-stability
//!   time-step bounds.
//! - [`greedy`]: POD-greedy adaptive sampling with a residual-based
//!   error indicator.
//! - [`problem`], [`metrics`], [`io`], [`rng`]: experiment setup,
//!   error metrics, on-disk formats and the seeded random field.

pub mod assembly;
pub mod avf;
pub mod deim;
pub mod error;
pub mod greedy;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod pod;
pub mod potential;
pub mod problem;
pub mod quadrature;
pub mod rng;
pub mod rom;
pub mod space;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
