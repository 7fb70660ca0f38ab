//! Convex quadratically-constrained subproblem of the alternating optimizer
//! and the interior-point solver for it.

pub mod dump;
pub mod ipm;
pub mod problem;

pub use ipm::{solve, ConicResult, SolveStatus, SolverOptions};
pub use problem::{MaxMinQcqp, QuadConstraint};
