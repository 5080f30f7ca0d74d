//! Double-loop ADMM for `min ‖Du‖₁/‖Du‖₂ s.t. Au = b, u ∈ [p, q]^N` and the
//! single-split solvers that share its inner loop.
//!
//! The outer loop splits `h = Du` and alternates
//!
//! ```text
//! u⁽ᵏ⁺¹⁾ = argmin_u  L(u, h⁽ᵏ⁾; g⁽ᵏ⁾)          (inner ADMM)
//! h⁽ᵏ⁺¹⁾ = argmin_h  L(u⁽ᵏ⁺¹⁾, h; g⁽ᵏ⁾)         (closed form, see prox::h_update)
//! g⁽ᵏ⁺¹⁾ = g⁽ᵏ⁾ + Du⁽ᵏ⁺¹⁾ − h⁽ᵏ⁺¹⁾
//! ```
//!
//! The inner loop splits `d = Du`, `v = u` and keeps `Au = b` through a
//! penalty with scaled dual `z`. Its variables `d, v, w, y, z` are initialized
//! once and carried across outer iterations; only the counter `j` resets.
//!
//! TV, `Lp` and `L1 − αL2` run the same loop with the `ρ` coupling removed
//! and the shrinkage of the `d` update swapped for their own proximal map.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::{Backend, LinearSolveReport, NormalSystem};
use super::{Diagnostics, SolverParams};
use crate::error::{param, Error, Result};
use crate::grid::{norm2, relative_error, Image};
use crate::operators::{
    field_len, gradient_adjoint_into, gradient_into, GradientField, MeasurementOperator,
};
use crate::prox::{self, HUpdateInput};

/// Regularizer on the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    /// `‖Du‖₁ / ‖Du‖₂`, double loop.
    L1OverL2,
    /// `‖Du‖₁`.
    Tv,
    /// `Σ |Du|^{1/2}`.
    Lp,
    /// `‖Du‖₁ − α‖Du‖₂`.
    L1MinusAlphaL2 { alpha: f64 },
}

impl Regularizer {
    pub fn is_ratio(&self) -> bool {
        matches!(self, Regularizer::L1OverL2)
    }

    /// Value of the regularizer at a gradient.
    pub fn value(&self, du: &[f64]) -> f64 {
        let l1: f64 = du.iter().map(|v| v.abs()).sum();
        match *self {
            Regularizer::L1OverL2 => ratio_objective(du),
            Regularizer::Tv => l1,
            Regularizer::Lp => du.iter().map(|v| v.abs().sqrt()).sum(),
            Regularizer::L1MinusAlphaL2 { alpha } => l1 - alpha * norm2(du),
        }
    }

    /// Applies the `d`-update proximal map with threshold `mu` in place.
    fn prox_in_place(&self, x: &mut [f64], mu: f64) {
        match *self {
            Regularizer::L1OverL2 | Regularizer::Tv => prox::soft_shrink_in_place(x, mu),
            Regularizer::Lp => prox::half_threshold_in_place(x, mu),
            Regularizer::L1MinusAlphaL2 { alpha } => prox::prox_l1_minus_al2_in_place(x, alpha, mu),
        }
    }
}

/// `‖x‖₁ / ‖x‖₂`, with 0 for the zero vector.
pub fn ratio_objective(x: &[f64]) -> f64 {
    let n2 = norm2(x);
    if n2 == 0.0 {
        0.0
    } else {
        x.iter().map(|v| v.abs()).sum::<f64>() / n2
    }
}

/// A linear inverse problem `Au = b`.
pub struct Problem<'a> {
    pub op: &'a dyn MeasurementOperator,
    pub b: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(op: &'a dyn MeasurementOperator, b: Vec<f64>) -> Result<Self> {
        if b.len() != op.data_len() {
            return Err(Error::Dimension { expected: op.data_len(), got: b.len() });
        }
        Ok(Self { op, b })
    }

    /// Noise-free data `b = A u`.
    pub fn from_truth(op: &'a dyn MeasurementOperator, truth: &Image) -> Result<Self> {
        if truth.shape() != op.shape() {
            return param("ground truth shape does not match the operator");
        }
        let b = op.apply(truth);
        Ok(Self { op, b })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.op.shape()
    }
}

/// Optional inputs of a solve.
#[derive(Clone, Default)]
pub struct SolveOptions<'a> {
    /// Enables the relative-error trace.
    pub ground_truth: Option<&'a Image>,
    /// Initial `u`; `v` starts at its box projection and, for the ratio
    /// model, `h` at `Du`. Defaults to zero.
    pub initial: Option<Image>,
    pub backend: Backend,
}

/// Result of a solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Image,
    pub diagnostics: Diagnostics,
}

/// Outer variables `u⁽ᵏ⁾, h⁽ᵏ⁾, g⁽ᵏ⁾`.
#[derive(Debug, Clone)]
pub struct OuterState {
    pub u: Image,
    pub h: GradientField,
    pub g: GradientField,
    pub k: usize,
}

/// Inner variables carried across outer iterations.
#[derive(Debug, Clone)]
pub struct InnerState {
    pub d: GradientField,
    pub v: Image,
    pub w: Image,
    pub y: GradientField,
    pub z: Vec<f64>,
    pub j: usize,
}

/// Summary of one inner iteration.
#[derive(Debug, Clone, Copy)]
pub struct InnerStep {
    /// `‖u_{j+1} − u_j‖₂`.
    pub change: f64,
    /// `‖u_{j+1} − u_j‖₂ / ‖u_{j+1}‖₂`.
    pub rel_change: f64,
    /// `‖Au_{j+1} − b‖₂ / ‖b‖₂`.
    pub feasibility: f64,
    pub linear: LinearSolveReport,
}

/// Smooth part of the augmented Lagrangian of the ratio model,
/// `‖Du‖₁/‖h‖₂ + ρ⟨g, Du − h⟩ + (ρ/2)‖Du − h‖²`. Returns `+∞` when `h = 0`.
pub fn lagrangian_smooth(du: &[f64], h: &[f64], g: &[f64], rho: f64) -> f64 {
    let hn = norm2(h);
    if hn == 0.0 {
        return f64::INFINITY;
    }
    let l1: f64 = du.iter().map(|v| v.abs()).sum();
    let mut lin = 0.0;
    let mut quad = 0.0;
    for i in 0..du.len() {
        let r = du[i] - h[i];
        lin += g[i] * r;
        quad += r * r;
    }
    l1 / hn + rho * lin + 0.5 * rho * quad
}

/// Augmented Lagrangian of the ratio model including its indicator terms:
/// `+∞` when `‖Au − b‖₂ > feas_tol · max(‖b‖₂, 1)`, when `u` leaves the box by
/// more than `feas_tol`, or when `h = 0`.
pub fn lagrangian_value(state: &OuterState, problem: &Problem<'_>, params: &SolverParams, feas_tol: f64) -> f64 {
    let u = state.u.values();
    let au = problem.op.apply(&state.u);
    let res: f64 = au.iter().zip(&problem.b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if res > feas_tol * norm2(&problem.b).max(1.0) {
        return f64::INFINITY;
    }
    if let Some((p, q)) = params.bounds {
        if u.iter().any(|&x| x < p - feas_tol || x > q + feas_tol) {
            return f64::INFINITY;
        }
    }
    let (rows, cols) = state.u.shape();
    let mut du = vec![0.0; field_len(rows, cols)];
    gradient_into(rows, cols, u, &mut du);
    lagrangian_smooth(&du, state.h.as_slice(), state.g.as_slice(), params.rho)
}

/// Stateful ADMM solver. [`solve`] drives it to completion; the step
/// methods are public for instrumentation.
pub struct AdmmSolver<'a> {
    problem: &'a Problem<'a>,
    params: SolverParams,
    reg: Regularizer,
    system: NormalSystem<'a>,
    rows: usize,
    cols: usize,
    outer: OuterState,
    inner: InnerState,
    rng: ChaCha8Rng,
    diag: Diagnostics,
    truth: Option<&'a Image>,
    start: Instant,
    b_norm: f64,
    /// `D u` of the latest inner iterate.
    du: Vec<f64>,
    au: Vec<f64>,
    h_norm: f64,
}

impl<'a> AdmmSolver<'a> {
    pub fn new(
        problem: &'a Problem<'a>,
        reg: Regularizer,
        params: &SolverParams,
        opts: SolveOptions<'a>,
    ) -> Result<Self> {
        params.validate()?;
        if let Regularizer::L1MinusAlphaL2 { alpha } = reg {
            if !(0.0..=1.0).contains(&alpha) {
                return param(format!("alpha must lie in [0, 1], got {alpha}"));
            }
        }
        let (rows, cols) = problem.shape();
        if let Some(t) = opts.ground_truth {
            if t.shape() != (rows, cols) {
                return param("ground truth shape does not match the problem");
            }
        }
        let grad_weight = if reg.is_ratio() { params.rho + params.gamma } else { params.gamma };
        let system = NormalSystem::new(
            problem.op,
            params.lambda,
            grad_weight,
            params.beta,
            opts.backend,
            params.cg_tol,
            params.cg_max_iter,
        )?;
        let flen = field_len(rows, cols);

        let u0 = match opts.initial {
            Some(u) if u.shape() != (rows, cols) => return param("initial image shape does not match the problem"),
            Some(u) => u,
            None => Image::zeros(rows, cols),
        };
        let mut v0 = u0.clone();
        if let Some((p, q)) = params.bounds {
            v0.values_mut().iter_mut().for_each(|x| *x = x.clamp(p, q));
        }
        let mut du = vec![0.0; flen];
        gradient_into(rows, cols, u0.values(), &mut du);
        let h0 = if reg.is_ratio() { du.clone() } else { vec![0.0; flen] };
        let h_norm = norm2(&h0);

        let outer = OuterState {
            u: u0,
            h: GradientField::from_vec(rows, cols, h0)?,
            g: GradientField::zeros(rows, cols),
            k: 0,
        };
        let inner = InnerState {
            d: GradientField::from_vec(rows, cols, du.clone())?,
            v: v0,
            w: Image::zeros(rows, cols),
            y: GradientField::zeros(rows, cols),
            z: vec![0.0; problem.op.data_len()],
            j: 0,
        };
        let b_norm = norm2(&problem.b);
        Ok(Self {
            problem,
            params: params.clone(),
            reg,
            system,
            rows,
            cols,
            outer,
            inner,
            rng: ChaCha8Rng::seed_from_u64(params.rng_seed),
            diag: Diagnostics::default(),
            truth: opts.ground_truth,
            start: Instant::now(),
            b_norm,
            du,
            au: vec![0.0; problem.op.data_len()],
            h_norm,
        })
    }

    pub fn outer_state(&self) -> &OuterState {
        &self.outer
    }

    pub fn inner_state(&self) -> &InnerState {
        &self.inner
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diag
    }

    /// Threshold of the `d` update.
    fn d_threshold(&self) -> f64 {
        if self.reg.is_ratio() {
            1.0 / (self.params.gamma * self.h_norm)
        } else {
            1.0 / self.params.gamma
        }
    }

    /// One pass of the u, d, v primal updates and w, y, z dual updates.
    pub fn inner_step(&mut self) -> InnerStep {
        let (rows, cols) = (self.rows, self.cols);
        let n = rows * cols;
        let p = &self.params;
        let op = self.problem.op;
        let b = &self.problem.b;
        let rho_eff = if self.reg.is_ratio() { p.rho } else { 0.0 };

        // rhs = λAᵀ(b − z) + Dᵀ(γ(d − y) + ρ(h − g)) + β(v − w)
        let resid: Vec<f64> = b.iter().zip(&self.inner.z).map(|(b, z)| b - z).collect();
        let mut rhs = vec![0.0; n];
        op.adjoint_into(&resid, &mut rhs);
        let (d, y, h, g) =
            (self.inner.d.as_slice(), self.inner.y.as_slice(), self.outer.h.as_slice(), self.outer.g.as_slice());
        let grad_rhs: Vec<f64> =
            (0..d.len()).map(|i| p.gamma * (d[i] - y[i]) + rho_eff * (h[i] - g[i])).collect();
        let mut dt = vec![0.0; n];
        gradient_adjoint_into(rows, cols, &grad_rhs, &mut dt);
        let (v, w) = (self.inner.v.values(), self.inner.w.values());
        for i in 0..n {
            rhs[i] = p.lambda * rhs[i] + dt[i] + p.beta * (v[i] - w[i]);
        }

        let u_prev = self.outer.u.values().to_vec();
        let linear = self.system.solve(&rhs, self.outer.u.values_mut());
        if !linear.converged {
            self.diag.cg_failures += 1;
        }
        let u = self.outer.u.values();

        gradient_into(rows, cols, u, &mut self.du);
        let mu = self.d_threshold();
        let d = self.inner.d.as_mut_slice();
        let y = self.inner.y.as_slice();
        for i in 0..d.len() {
            d[i] = self.du[i] + y[i];
        }
        self.reg.prox_in_place(d, mu);

        let v = self.inner.v.values_mut();
        let w = self.inner.w.values();
        for i in 0..n {
            v[i] = u[i] + w[i];
        }
        if let Some((lo, hi)) = p.bounds {
            v.iter_mut().for_each(|x| *x = x.clamp(lo, hi));
        }
        let v = self.inner.v.values();
        let w = self.inner.w.values_mut();
        for i in 0..n {
            w[i] += u[i] - v[i];
        }
        let y = self.inner.y.as_mut_slice();
        let d = self.inner.d.as_slice();
        for i in 0..y.len() {
            y[i] += self.du[i] - d[i];
        }
        op.apply_into(u, &mut self.au);
        let mut res2 = 0.0;
        for ((z, a), b) in self.inner.z.iter_mut().zip(&self.au).zip(b) {
            let r = a - b;
            *z += r;
            res2 += r * r;
        }
        self.inner.j += 1;

        let change = u.iter().zip(&u_prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let un = norm2(u);
        InnerStep {
            change,
            rel_change: if un > 0.0 { change / un } else { change },
            feasibility: res2.sqrt() / self.b_norm.max(f64::MIN_POSITIVE),
            linear,
        }
    }

    /// Runs inner iterations until `j_max` or the relative change falls to
    /// `eps_rel`. Returns the number of iterations run.
    pub fn inner_admm(&mut self) -> usize {
        self.inner.j = 0;
        loop {
            let step = self.inner_step();
            if self.inner.j >= self.params.j_max || step.rel_change <= self.params.eps_rel {
                return self.inner.j;
            }
        }
    }

    /// One outer iteration. Returns the relative change of `u`.
    pub fn outer_step(&mut self) -> f64 {
        let u_prev = self.outer.u.values().to_vec();
        let inner_iters = self.inner_admm();

        if self.reg.is_ratio() {
            let g = self.outer.g.as_mut_slice();
            let target: Vec<f64> = self.du.iter().zip(g.iter()).map(|(a, b)| a + b).collect();
            let a = self.du.iter().map(|v| v.abs()).sum();
            let upd = prox::h_update(HUpdateInput { target: &target, a, rho: self.params.rho }, &mut self.rng);
            if upd.random_branch {
                self.diag.h_branch_count += 1;
            }
            for i in 0..g.len() {
                g[i] += self.du[i] - upd.h[i];
            }
            self.outer.h.as_mut_slice().copy_from_slice(&upd.h);
            self.h_norm = norm2(&upd.h);
            if self.h_norm < self.params.h_floor(self.rows * self.cols) {
                self.diag.diverged = true;
            }
        }
        self.outer.k += 1;

        let u = self.outer.u.values();
        let change = u.iter().zip(&u_prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let un = norm2(u);
        let rel = if un > 0.0 { change / un } else { change };

        let lag = if self.reg.is_ratio() {
            lagrangian_smooth(&self.du, self.outer.h.as_slice(), self.outer.g.as_slice(), self.params.rho)
        } else {
            self.reg.value(&self.du)
        };
        let res: f64 = self.au.iter().zip(&self.problem.b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        self.diag.lagrangian.push(lag);
        self.diag.objective.push(ratio_objective(&self.du));
        self.diag.feasibility.push(res / self.b_norm.max(f64::MIN_POSITIVE));
        self.diag.u_change.push(change);
        self.diag.h_norm.push(self.h_norm);
        self.diag.inner_iterations.push(inner_iters);
        self.diag.elapsed.push(self.start.elapsed().as_secs_f64());
        if let Some(t) = self.truth {
            self.diag.re.push(relative_error(&self.outer.u, t).unwrap_or(f64::NAN));
        }
        rel
    }

    /// `‖Du − d‖ / ‖Du‖`, plus `‖Du − h‖ / ‖Du‖` for the ratio model.
    /// Small `u` changes alone do not mean convergence: the duals can keep
    /// growing while `u` sits still.
    fn split_residual(&self) -> f64 {
        let scale = norm2(&self.du).max(f64::MIN_POSITIVE);
        let dist = |other: &[f64]| self.du.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let mut r = dist(self.inner.d.as_slice());
        if self.reg.is_ratio() {
            r = r.max(dist(self.outer.h.as_slice()));
        }
        r / scale
    }

    /// Runs outer iterations until `k_max`, convergence or divergence.
    pub fn run(mut self) -> Solution {
        while self.outer.k < self.params.k_max {
            let rel = self.outer_step();
            if self.diag.diverged {
                break;
            }
            if rel <= self.params.eps_rel && self.split_residual() <= self.params.eps_rel {
                self.diag.converged = true;
                break;
            }
        }
        self.finish()
    }

    fn finish(mut self) -> Solution {
        let mut u = self.outer.u;
        if let Some((p, q)) = self.params.bounds {
            let mut worst: f64 = 0.0;
            for x in u.values_mut() {
                worst = worst.max(p - *x).max(*x - q);
                *x = x.clamp(p, q);
            }
            self.diag.box_violation = worst.max(0.0);
        }
        Solution { u, diagnostics: self.diag }
    }
}

/// Runs the solver for `reg` to completion.
pub fn solve(
    problem: &Problem<'_>,
    reg: Regularizer,
    params: &SolverParams,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    Ok(AdmmSolver::new(problem, reg, params, opts)?.run())
}

/// `min ‖Du‖₁/‖Du‖₂ s.t. Au = b, u ∈ [p, q]^N`.
pub fn solve_l1_over_l2(problem: &Problem<'_>, params: &SolverParams, opts: SolveOptions<'_>) -> Result<Solution> {
    solve(problem, Regularizer::L1OverL2, params, opts)
}

/// `min ‖Du‖₁ s.t. Au = b, u ∈ [p, q]^N`.
pub fn solve_tv(problem: &Problem<'_>, params: &SolverParams, opts: SolveOptions<'_>) -> Result<Solution> {
    solve(problem, Regularizer::Tv, params, opts)
}

/// `min Σ|Du|^{1/2} s.t. Au = b, u ∈ [p, q]^N`.
pub fn solve_lp(problem: &Problem<'_>, params: &SolverParams, opts: SolveOptions<'_>) -> Result<Solution> {
    solve(problem, Regularizer::Lp, params, opts)
}

/// `min ‖Du‖₁ − α‖Du‖₂ s.t. Au = b, u ∈ [p, q]^N`.
pub fn solve_l1_minus_l2(
    problem: &Problem<'_>,
    params: &SolverParams,
    alpha: f64,
    opts: SolveOptions<'_>,
) -> Result<Solution> {
    solve(problem, Regularizer::L1MinusAlphaL2 { alpha }, params, opts)
}
