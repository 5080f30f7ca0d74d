//! Unitary 2D discrete Fourier transforms on column-major grids.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse unitary DFT plans for an `rows × cols` grid.
#[derive(Clone)]
pub struct Fft2 {
    rows: usize,
    cols: usize,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("rows", &self.rows).field("cols", &self.cols).finish()
    }
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            scale: 1.0 / ((rows * cols) as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.col_fwd, &self.row_fwd);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.col_inv, &self.row_inv);
    }

    /// Forward transform of a real array.
    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    fn transform(&self, data: &mut [Complex64], col: &Arc<dyn Fft<f64>>, row: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len());
        let (rows, cols) = (self.rows, self.cols);
        if rows > 1 {
            // Columns are contiguous; rustfft processes consecutive chunks.
            col.process(data);
        }
        if cols > 1 {
            let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
            for c in 0..cols {
                for r in 0..rows {
                    t[c + r * cols] = data[r + c * rows];
                }
            }
            row.process(&mut t);
            for c in 0..cols {
                for r in 0..rows {
                    data[r + c * rows] = t[c + r * cols];
                }
            }
        }
        for v in data.iter_mut() {
            *v *= self.scale;
        }
    }
}
