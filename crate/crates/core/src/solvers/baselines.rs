//! Non-iterative and algebraic baselines.

use super::Problem;
use crate::error::{param, Error, Result};
use crate::grid::Image;

/// Zero-filled inverse DFT: unmeasured bins set to zero, real part kept.
pub fn zero_fill(problem: &Problem<'_>) -> Result<Image> {
    if problem.op.mask().is_none() {
        return Err(Error::Unsupported(format!("zero filling needs a Fourier operator, got {}", problem.op.name())));
    }
    Ok(problem.op.adjoint(&problem.b))
}

/// Simultaneous algebraic reconstruction technique,
/// `u ← max(0, u + ω C Aᵀ R (b − Au))` with `R`, `C` the inverse row and
/// column sums of `A`. Rows or columns with zero sum get zero weight.
pub fn sart_solve(problem: &Problem<'_>, iterations: usize, relaxation: f64) -> Result<Image> {
    let a = problem
        .op
        .matrix()
        .ok_or_else(|| Error::Unsupported(format!("SART needs an explicit matrix, got {}", problem.op.name())))?;
    if !(relaxation > 0.0 && relaxation < 2.0) {
        return param(format!("SART relaxation must lie in (0, 2), got {relaxation}"));
    }
    let inv = |s: f64| if s > 0.0 { 1.0 / s } else { 0.0 };
    let row_w: Vec<f64> = a.row_sums().into_iter().map(inv).collect();
    let col_w: Vec<f64> = a.col_sums().into_iter().map(inv).collect();
    let (rows, cols) = problem.shape();
    let mut u = Image::zeros(rows, cols);
    let mut au = vec![0.0; a.nrows()];
    let mut back = vec![0.0; a.ncols()];
    for _ in 0..iterations {
        a.matvec_into(u.values(), &mut au);
        let r: Vec<f64> = au.iter().zip(&problem.b).zip(&row_w).map(|((ax, b), w)| w * (b - ax)).collect();
        problem.op.adjoint_into(&r, &mut back);
        for ((x, bk), cw) in u.values_mut().iter_mut().zip(&back).zip(&col_w) {
            *x = (*x + relaxation * cw * bk).max(0.0);
        }
    }
    Ok(u)
}
