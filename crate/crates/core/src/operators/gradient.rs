//! Forward differences with periodic boundary conditions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{norm2, Image};

/// Stacked horizontal and vertical differences of an image.
///
/// The horizontal block comes first. For 1D signals only one block of length
/// `N` is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl GradientField {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; field_len(rows, cols)] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let expected = field_len(rows, cols);
        if data.len() != expected {
            return Err(Error::Dimension { expected, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_1d(&self) -> bool {
        self.rows == 1 || self.cols == 1
    }

    /// Horizontal differences, or the only block for 1D signals.
    pub fn dx(&self) -> &[f64] {
        &self.data[..self.rows * self.cols]
    }

    /// Vertical differences; empty for 1D signals.
    pub fn dy(&self) -> &[f64] {
        &self.data[self.rows * self.cols..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn norm1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.data)
    }
}

/// Length of the stacked gradient of an `rows × cols` image.
pub fn field_len(rows: usize, cols: usize) -> usize {
    if rows == 1 || cols == 1 {
        rows * cols
    } else {
        2 * rows * cols
    }
}

/// Writes `D u` into `out` (length [`field_len`]).
pub fn gradient_into(rows: usize, cols: usize, u: &[f64], out: &mut [f64]) {
    let n = rows * cols;
    debug_assert_eq!(u.len(), n);
    debug_assert_eq!(out.len(), field_len(rows, cols));
    if rows == 1 || cols == 1 {
        for i in 0..n {
            out[i] = u[(i + 1) % n] - u[i];
        }
        return;
    }
    let (dx, dy) = out.split_at_mut(n);
    for c in 0..cols {
        let next_c = if c + 1 == cols { 0 } else { c + 1 };
        for r in 0..rows {
            let i = r + c * rows;
            let next_r = if r + 1 == rows { 0 } else { r + 1 };
            dx[i] = u[r + next_c * rows] - u[i];
            dy[i] = u[next_r + c * rows] - u[i];
        }
    }
}

/// Writes `Dᵀ g` into `out` (length `rows * cols`).
pub fn gradient_adjoint_into(rows: usize, cols: usize, g: &[f64], out: &mut [f64]) {
    let n = rows * cols;
    debug_assert_eq!(out.len(), n);
    debug_assert_eq!(g.len(), field_len(rows, cols));
    if rows == 1 || cols == 1 {
        for i in 0..n {
            let prev = if i == 0 { n - 1 } else { i - 1 };
            out[i] = g[prev] - g[i];
        }
        return;
    }
    let (gx, gy) = g.split_at(n);
    for c in 0..cols {
        let prev_c = if c == 0 { cols - 1 } else { c - 1 };
        for r in 0..rows {
            let i = r + c * rows;
            let prev_r = if r == 0 { rows - 1 } else { r - 1 };
            out[i] = gx[r + prev_c * rows] - gx[i] + gy[prev_r + c * rows] - gy[i];
        }
    }
}

pub fn gradient_apply(u: &Image) -> GradientField {
    let (rows, cols) = u.shape();
    let mut field = GradientField::zeros(rows, cols);
    gradient_into(rows, cols, u.values(), &mut field.data);
    field
}

pub fn gradient_adjoint(g: &GradientField) -> Image {
    let (rows, cols) = g.shape();
    let mut out = Image::zeros(rows, cols);
    gradient_adjoint_into(rows, cols, &g.data, out.values_mut());
    out
}

/// Eigenvalues of `DᵀD` on the periodic grid, laid out like an image over
/// frequency indices: `4 sin²(πk/m) + 4 sin²(πl/n)`.
pub fn gradient_gram_spectrum(rows: usize, cols: usize) -> Vec<f64> {
    let sx: Vec<f64> = (0..rows).map(|k| 4.0 * (PI * k as f64 / rows as f64).sin().powi(2)).collect();
    let sy: Vec<f64> = (0..cols).map(|l| 4.0 * (PI * l as f64 / cols as f64).sin().powi(2)).collect();
    let mut spec = Vec::with_capacity(rows * cols);
    for l in 0..cols {
        for k in 0..rows {
            spec.push(sx[k] + sy[l]);
        }
    }
    spec
}
