//! Reconstruction algorithms.

mod admm;
mod baselines;
mod diagnostics;
mod linear;
mod params;

pub use admm::{
    lagrangian_smooth, lagrangian_value, ratio_objective, solve, solve_l1_minus_l2, solve_l1_over_l2, solve_lp,
    solve_tv, AdmmSolver, InnerState, InnerStep, OuterState, Problem, Regularizer, Solution, SolveOptions,
};
pub use baselines::{sart_solve, zero_fill};
pub use diagnostics::Diagnostics;
pub use linear::{solve_u_linear, Backend, LinearSolveReport, NormalSystem};
pub use params::SolverParams;
