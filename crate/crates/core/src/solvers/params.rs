use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Algorithm parameters shared by every ADMM-based solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Penalty on `Du = h` (outer loop of the ratio model).
    pub rho: f64,
    /// Penalty on `Du = d`.
    pub gamma: f64,
    /// Penalty on `u = v` (box splitting).
    pub beta: f64,
    /// Penalty on `Au = b`.
    pub lambda: f64,
    /// Box `[p, q]`; `None` drops the projection.
    pub bounds: Option<(f64, f64)>,
    pub k_max: usize,
    pub j_max: usize,
    /// Relative-change stopping tolerance for both loops. Zero runs to the caps.
    pub eps_rel: f64,
    /// Divergence guard on `‖h‖₂`; `None` means `1e-12 √N`.
    pub h_norm_floor: Option<f64>,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub rng_seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            gamma: 1.0,
            beta: 1.0,
            lambda: 1000.0,
            bounds: Some((0.0, 1.0)),
            k_max: 500,
            j_max: 5,
            eps_rel: 1e-5,
            h_norm_floor: None,
            cg_tol: 1e-10,
            cg_max_iter: 500,
            rng_seed: 0,
        }
    }
}

impl SolverParams {
    /// Frequency-sampling problems (super-resolution, MRI).
    pub fn fourier() -> Self {
        Self::default()
    }

    /// Tomography with an explicit system matrix.
    pub fn ct() -> Self {
        Self {
            rho: 0.0625,
            gamma: 0.25,
            beta: 0.1,
            lambda: 0.05,
            j_max: 3,
            k_max: 300,
            cg_tol: 1e-4,
            cg_max_iter: 100,
            ..Self::default()
        }
    }

    /// Sets `rho` and `gamma` together.
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self.gamma = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho", self.rho),
            ("gamma", self.gamma),
            ("beta", self.beta),
            ("lambda", self.lambda),
            ("cg_tol", self.cg_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return param(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some((p, q)) = self.bounds {
            if !(p <= q) {
                return param(format!("box lower bound {p} exceeds upper bound {q}"));
            }
        }
        if self.eps_rel < 0.0 {
            return param("eps_rel must be nonnegative");
        }
        if self.k_max == 0 || self.j_max == 0 || self.cg_max_iter == 0 {
            return param("iteration caps must be positive");
        }
        if let Some(f) = self.h_norm_floor {
            if !(f > 0.0) {
                return param("h_norm_floor must be positive");
            }
        }
        Ok(())
    }

    pub fn h_floor(&self, n: usize) -> f64 {
        self.h_norm_floor.unwrap_or(1e-12 * (n as f64).sqrt())
    }
}
