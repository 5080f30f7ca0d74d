use serde::{Deserialize, Serialize};

/// Per-outer-iteration traces of a solver run.
///
/// Every trace has one entry per outer iteration. For the ratio model the
/// `lagrangian` entries hold the smooth part of the augmented Lagrangian
/// `‖Du‖₁/‖h‖₂ + ρ⟨g, Du − h⟩ + (ρ/2)‖Du − h‖²`; the indicator terms are
/// reported through `feasibility` and `box_violation`. For the single-split
/// solvers (TV, `Lp`, `L1 − αL2`) it holds their regularizer value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub lagrangian: Vec<f64>,
    /// `‖Du‖₁ / ‖Du‖₂` (0 for a constant image).
    pub objective: Vec<f64>,
    /// Relative error to the ground truth, when one was supplied.
    pub re: Vec<f64>,
    /// `‖Au − b‖₂ / ‖b‖₂`.
    pub feasibility: Vec<f64>,
    /// `‖u⁽ᵏ⁺¹⁾ − u⁽ᵏ⁾‖₂`.
    pub u_change: Vec<f64>,
    pub h_norm: Vec<f64>,
    pub inner_iterations: Vec<usize>,
    /// Seconds since the start of the run.
    pub elapsed: Vec<f64>,
    /// Times the zero-target branch of the `h` update fired.
    pub h_branch_count: usize,
    /// Linear solves where CG hit its iteration cap.
    pub cg_failures: usize,
    pub diverged: bool,
    pub converged: bool,
    /// Largest box violation of the last inner iterate before clamping.
    pub box_violation: f64,
}

impl Diagnostics {
    pub fn outer_iterations(&self) -> usize {
        self.objective.len()
    }

    pub fn total_inner_iterations(&self) -> usize {
        self.inner_iterations.iter().sum()
    }

    pub fn wall_time(&self) -> f64 {
        self.elapsed.last().copied().unwrap_or(0.0)
    }
}
