//! Experiment harness: configuration files, subcommand implementations
//! and result reports for the Allen-Cahn reduced-order modelling
//! toolkit.

pub mod commands;
pub mod config;
pub mod report;

/// Process exit codes of the `acmor` binary.
pub mod exit_codes {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const ASSERTION: i32 = 4;
}

/// Map an error to the documented exit code.
pub fn exit_code_for(err: &acmor::Error) -> i32 {
    use acmor::Error::*;
    match err {
        Config(_) | InvalidDomain(..) | SpacingTooCoarse { .. } | InvalidPotential { .. }
        | Io(_) | MatrixFormat(_) => exit_codes::CONFIG,
        EnergyIncrease { .. } => exit_codes::ASSERTION,
        NewtonDivergence { .. } | RankDeficiency { .. } | SingularInterpolation { .. }
        | DimensionMismatch(_) | NonlinearDomain { .. } | LinearSolve(_) => exit_codes::SOLVER,
    }
}
