//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh spacing h = {h} exceeds domain side length {side}")]
    SpacingTooCoarse { h: f64, side: f64 },

    #[error("invalid domain: side lengths must be positive, got {0} x {1}")]
    InvalidDomain(f64, f64),

    #[error("potential argument {value} outside (-1, 1) on element {element} with clamping disabled")]
    NonlinearDomain { value: f64, element: usize },

    #[error("logarithmic potential requires theta > 0 and theta_c > 0 (got theta = {theta}, theta_c = {theta_c})")]
    InvalidPotential { theta: f64, theta_c: f64 },

    #[error("Newton did not converge after {iters} iterations, |r|_2 = {residual:.3e}")]
    NewtonDivergence { iters: usize, residual: f64 },

    #[error("requested {requested} POD modes but numerical rank is {rank}")]
    RankDeficiency { requested: usize, rank: usize },

    #[error("DEIM residual numerically zero after selecting {selected} of {requested} indices")]
    SingularInterpolation { selected: usize, requested: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("discrete energy increased by {increase:.3e} over step {step}")]
    EnergyIncrease { step: usize, increase: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid matrix file: {0}")]
    MatrixFormat(String),
}
