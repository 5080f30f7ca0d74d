//! Closed-form subproblem solvers used inside the ADMM iterations.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Result};
use crate::grid::norm2;

/// `sign(x) max(|x| - mu, 0)`.
#[inline]
pub fn shrink_scalar(x: f64, mu: f64) -> f64 {
    if x > mu {
        x - mu
    } else if x < -mu {
        x + mu
    } else {
        0.0
    }
}

pub fn soft_shrink(x: &[f64], mu: f64) -> Vec<f64> {
    x.iter().map(|&v| shrink_scalar(v, mu)).collect()
}

pub fn soft_shrink_in_place(x: &mut [f64], mu: f64) {
    for v in x {
        *v = shrink_scalar(*v, mu);
    }
}

/// Exact minimizer of `½(y − x)² + mu |y|^{1/2}`.
///
/// Nonzero solutions exist only above the jump `1.5 mu^{2/3}`; at the jump the
/// zero solution is returned.
#[inline]
pub fn half_threshold_scalar(x: f64, mu: f64) -> f64 {
    if mu == 0.0 {
        return x;
    }
    let ax = x.abs();
    let jump = 1.5 * mu.powf(2.0 / 3.0);
    if ax <= jump {
        return 0.0;
    }
    // Trigonometric root of the stationarity cubic in √|y|.
    let phi = (mu / 4.0 * (ax / 3.0).powf(-1.5)).acos();
    let y = 2.0 / 3.0 * ax * (1.0 + (2.0 * std::f64::consts::PI / 3.0 - 2.0 * phi / 3.0).cos());
    y.copysign(x)
}

pub fn half_threshold(x: &[f64], mu: f64) -> Vec<f64> {
    x.iter().map(|&v| half_threshold_scalar(v, mu)).collect()
}

pub fn half_threshold_in_place(x: &mut [f64], mu: f64) {
    for v in x {
        *v = half_threshold_scalar(*v, mu);
    }
}

/// Minimizer of `½‖y − v‖² + mu (‖y‖₁ − alpha ‖y‖₂)` over the whole vector.
pub fn prox_l1_minus_al2(v: &[f64], alpha: f64, mu: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    prox_l1_minus_al2_in_place(&mut out, alpha, mu);
    out
}

pub fn prox_l1_minus_al2_in_place(v: &mut [f64], alpha: f64, mu: f64) {
    let (imax, vmax) = v
        .iter()
        .enumerate()
        .map(|(i, x)| (i, x.abs()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if vmax > mu {
        soft_shrink_in_place(v, mu);
        let nz = norm2(v);
        let scale = (nz + alpha * mu) / nz;
        for x in v.iter_mut() {
            *x *= scale;
        }
    } else if vmax > (1.0 - alpha) * mu {
        // One-sparse solution on the largest entry.
        let keep = (vmax + (alpha - 1.0) * mu).copysign(v[imax]);
        v.iter_mut().for_each(|x| *x = 0.0);
        v[imax] = keep;
    } else {
        v.iter_mut().for_each(|x| *x = 0.0);
    }
}

/// Elementwise clamp onto `[p, q]`.
pub fn box_project(u: &[f64], p: f64, q: f64) -> Result<Vec<f64>> {
    if p > q {
        return param(format!("box lower bound {p} exceeds upper bound {q}"));
    }
    Ok(u.iter().map(|&x| x.max(p).min(q)).collect())
}

/// Root `τ ≥ 1` of `τ²(τ − 1) = η` via the closed form
/// `τ = ⅓ + ⅓(ξ + 1/ξ)`, `ξ = ∛((27η + 2 + √((27η + 2)² − 4)) / 2)`.
pub fn solve_tau(eta: f64) -> f64 {
    debug_assert!(eta >= 0.0);
    let a = 27.0 * eta;
    // (27η + 2)² − 4 = 27η (27η + 4), without cancellation for small η.
    let disc = (a * (a + 4.0)).sqrt();
    let xi = ((a + 2.0 + disc) / 2.0).cbrt();
    let tau = (1.0 + xi + 1.0 / xi) / 3.0;
    // One Newton step on f(τ) = τ³ − τ² − η removes the cube-root round-off.
    let f = tau * tau * (tau - 1.0) - eta;
    let df = tau * (3.0 * tau - 2.0);
    (tau - f / df).max(1.0)
}

/// Inputs of the `h` subproblem `min_h a/‖h‖₂ + (ρ/2)‖h − target‖²`.
#[derive(Debug, Clone, Copy)]
pub struct HUpdateInput<'a> {
    /// `D u⁽ᵏ⁺¹⁾ + g⁽ᵏ⁾`.
    pub target: &'a [f64],
    /// `‖D u⁽ᵏ⁺¹⁾‖₁`.
    pub a: f64,
    pub rho: f64,
}

/// Result of [`h_update`].
#[derive(Debug, Clone)]
pub struct HUpdate {
    pub h: Vec<f64>,
    /// True when the target was zero and a random direction was drawn.
    pub random_branch: bool,
}

/// Closed-form `h` update. A zero target yields a random direction with
/// norm `∛(a/ρ)` drawn from `rng`.
pub fn h_update<R: Rng + ?Sized>(input: HUpdateInput<'_>, rng: &mut R) -> HUpdate {
    let HUpdateInput { target, a, rho } = input;
    let nt = norm2(target);
    if nt > 0.0 {
        let tau = solve_tau(a / (rho * nt * nt * nt));
        return HUpdate { h: target.iter().map(|v| tau * v).collect(), random_branch: false };
    }
    let radius = (a / rho).cbrt();
    let mut dir: Vec<f64> = (0..target.len()).map(|_| rng.sample(StandardNormal)).collect();
    let nd = norm2(&dir);
    for v in &mut dir {
        *v *= radius / nd;
    }
    HUpdate { h: dir, random_branch: true }
}
