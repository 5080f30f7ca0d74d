//! Solvers for the u-subproblem `(λAᵀA + c DᵀD + βI) u = rhs`.

use rustfft::num_complex::Complex64;

use super::SolverParams;
use crate::error::{param, Error, Result};
use crate::grid::{norm2, Image};
use crate::operators::{
    dot, field_len, gradient_adjoint_into, gradient_gram_spectrum, gradient_into, Fft2, MeasurementOperator,
};

/// Which back-end solves the u-subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Fourier division when the operator exposes a Gram spectrum, CG otherwise.
    #[default]
    Auto,
    Fourier,
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
}

enum Kind {
    Fourier { fft: Fft2, denom: Vec<f64> },
    /// `inv_diag` is a Jacobi preconditioner when `AᵀA` has a known diagonal.
    Cg { tol: f64, max_iter: usize, inv_diag: Option<Vec<f64>> },
}

/// `λAᵀA + c DᵀD + βI` for a fixed operator and weights.
pub struct NormalSystem<'a> {
    op: &'a dyn MeasurementOperator,
    rows: usize,
    cols: usize,
    lambda: f64,
    grad_weight: f64,
    beta: f64,
    kind: Kind,
}

impl<'a> NormalSystem<'a> {
    pub fn new(
        op: &'a dyn MeasurementOperator,
        lambda: f64,
        grad_weight: f64,
        beta: f64,
        backend: Backend,
        cg_tol: f64,
        cg_max_iter: usize,
    ) -> Result<Self> {
        if !(beta > 0.0) || lambda < 0.0 || grad_weight < 0.0 {
            return param("normal system needs beta > 0 and nonnegative weights");
        }
        let (rows, cols) = op.shape();
        let use_fourier = match backend {
            Backend::Auto => op.gram_spectrum().is_some(),
            Backend::Fourier => true,
            Backend::Cg => false,
        };
        let kind = if use_fourier {
            let spec_a = op
                .gram_spectrum()
                .ok_or_else(|| Error::Unsupported(format!("{} operator has no Gram spectrum", op.name())))?;
            let spec_d = gradient_gram_spectrum(rows, cols);
            let denom = spec_a.iter().zip(&spec_d).map(|(a, d)| lambda * a + grad_weight * d + beta).collect();
            Kind::Fourier { fft: Fft2::new(rows, cols), denom }
        } else {
            let inv_diag = op.matrix().map(|m| {
                let dtd = match (rows, cols) {
                    (1, 1) => 0.0,
                    (1, _) | (_, 1) => 2.0,
                    _ => 4.0,
                };
                m.col_sq_sums().iter().map(|a| 1.0 / (lambda * a + grad_weight * dtd + beta)).collect()
            });
            Kind::Cg { tol: cg_tol, max_iter: cg_max_iter, inv_diag }
        };
        Ok(Self { op, rows, cols, lambda, grad_weight, beta, kind })
    }

    pub fn is_fourier(&self) -> bool {
        matches!(self.kind, Kind::Fourier { .. })
    }

    /// `out = (λAᵀA + c DᵀD + βI) x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.rows * self.cols;
        let mut data = vec![0.0; self.op.data_len()];
        self.op.apply_into(x, &mut data);
        self.op.adjoint_into(&data, out);
        let mut grad = vec![0.0; field_len(self.rows, self.cols)];
        gradient_into(self.rows, self.cols, x, &mut grad);
        let mut dtd = vec![0.0; n];
        gradient_adjoint_into(self.rows, self.cols, &grad, &mut dtd);
        for i in 0..n {
            out[i] = self.lambda * out[i] + self.grad_weight * dtd[i] + self.beta * x[i];
        }
    }

    /// Solves in place; `x` holds the warm start on entry.
    pub fn solve(&self, rhs: &[f64], x: &mut [f64]) -> LinearSolveReport {
        match &self.kind {
            Kind::Fourier { fft, denom } => {
                let mut buf: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft.forward(&mut buf);
                for (b, d) in buf.iter_mut().zip(denom) {
                    *b /= d;
                }
                fft.inverse(&mut buf);
                for (xi, b) in x.iter_mut().zip(&buf) {
                    *xi = b.re;
                }
                LinearSolveReport { iterations: 1, converged: true, relative_residual: 0.0 }
            }
            Kind::Cg { tol, max_iter, inv_diag } => self.cg(rhs, x, *tol, *max_iter, inv_diag.as_deref()),
        }
    }

    /// Preconditioned CG. Stops on the unpreconditioned relative residual.
    fn cg(&self, rhs: &[f64], x: &mut [f64], tol: f64, max_iter: usize, inv_diag: Option<&[f64]>) -> LinearSolveReport {
        let n = x.len();
        let rhs_norm = norm2(rhs);
        if rhs_norm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return LinearSolveReport { iterations: 0, converged: true, relative_residual: 0.0 };
        }
        let precond = |r: &[f64], z: &mut [f64]| match inv_diag {
            Some(m) => z.iter_mut().zip(r).zip(m).for_each(|((z, r), m)| *z = r * m),
            None => z.copy_from_slice(r),
        };
        let mut ap = vec![0.0; n];
        self.apply(x, &mut ap);
        let mut r: Vec<f64> = rhs.iter().zip(&ap).map(|(b, a)| b - a).collect();
        let mut z = vec![0.0; n];
        precond(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut rr = dot(&r, &r);
        let target = tol * rhs_norm;
        let mut it = 0;
        while rr.sqrt() > target && it < max_iter {
            self.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            precond(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            rz = rz_new;
            rr = dot(&r, &r);
            it += 1;
        }
        let rel = rr.sqrt() / rhs_norm;
        LinearSolveReport { iterations: it, converged: rel <= tol, relative_residual: rel }
    }
}

/// Solves `(λAᵀA + (ρ + γ)DᵀD + βI) u = rhs` with the chosen back-end,
/// starting CG from zero.
pub fn solve_u_linear(
    rhs: &Image,
    op: &dyn MeasurementOperator,
    params: &SolverParams,
    backend: Backend,
) -> Result<(Image, LinearSolveReport)> {
    if rhs.shape() != op.shape() {
        return param("right-hand side shape does not match the operator");
    }
    let system = NormalSystem::new(
        op,
        params.lambda,
        params.rho + params.gamma,
        params.beta,
        backend,
        params.cg_tol,
        params.cg_max_iter,
    )?;
    let mut u = Image::zeros(rhs.rows(), rhs.cols());
    let report = system.solve(rhs.values(), u.values_mut());
    Ok((u, report))
}
