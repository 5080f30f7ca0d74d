//! Hermitian-symmetric sampling masks over the DFT grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Kept/discarded flag per DFT bin, laid out column-major like an image.
///
/// Every mask satisfies `keep[k] == keep[-k mod grid]`, which keeps `AᵀA`
/// real.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyMask {
    rows: usize,
    cols: usize,
    keep: Vec<bool>,
}

/// Index of the bin `-k` on an `rows × cols` grid.
fn partner(rows: usize, cols: usize, i: usize) -> usize {
    let (k, l) = (i % rows, i / rows);
    let pk = (rows - k) % rows;
    let pl = (cols - l) % cols;
    pk + pl * rows
}

/// Signed frequency of bin `k` on an axis of length `n`.
fn signed_freq(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl FrequencyMask {
    /// Builds a mask from raw flags and closes it under `k ↦ -k`.
    pub fn from_keep(rows: usize, cols: usize, mut keep: Vec<bool>) -> Result<Self> {
        if keep.len() != rows * cols {
            return Err(Error::Dimension { expected: rows * cols, got: keep.len() });
        }
        for i in 0..keep.len() {
            if keep[i] {
                keep[partner(rows, cols, i)] = true;
            }
        }
        Ok(Self { rows, cols, keep })
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self { rows, cols, keep: vec![true; rows * cols] }
    }

    /// Keeps `|k| <= f_c` on a length-`n` signal (wrap-around).
    pub fn lowpass_1d(n: usize, f_c: usize) -> Result<Self> {
        if 2 * f_c + 1 >= n {
            return param(format!("low-pass mask needs 2 f_c + 1 < N, got f_c={f_c}, N={n}"));
        }
        let keep = (0..n).map(|k| signed_freq(k, n).unsigned_abs() as usize <= f_c).collect();
        Ok(Self { rows: n, cols: 1, keep })
    }

    /// Largest centered `(2r+1) × (2r+1)` square of low frequencies whose
    /// sampling fraction does not exceed `ratio`.
    pub fn lowfreq_square(rows: usize, cols: usize, ratio: f64) -> Result<Self> {
        let total = (rows * cols) as f64;
        if !(ratio > 0.0 && ratio < 1.0) || ratio * total < 1.0 {
            return param(format!("square mask ratio {ratio} keeps no bins on {rows}x{cols}"));
        }
        let budget = ratio * total;
        let limit = rows.min(cols);
        let mut r = 0usize;
        while 2 * (r + 1) < limit && ((2 * r + 3) * (2 * r + 3)) as f64 <= budget {
            r += 1;
        }
        let r = r as u64;
        let keep = (0..rows * cols)
            .map(|i| {
                let k = signed_freq(i % rows, rows).unsigned_abs();
                let l = signed_freq(i / rows, cols).unsigned_abs();
                k <= r && l <= r
            })
            .collect();
        Ok(Self { rows, cols, keep })
    }

    /// `n_lines` lines through the DC bin at angles `jπ / n_lines`. Every bin a
    /// line passes through is kept.
    pub fn radial(rows: usize, cols: usize, n_lines: usize) -> Result<Self> {
        if n_lines == 0 {
            return param("radial mask needs at least one line");
        }
        let mut keep = vec![false; rows * cols];
        let (half_r, half_c) = ((rows / 2) as i64, (cols / 2) as i64);
        let (lo_r, hi_r) = (-half_r, rows as i64 - half_r - 1);
        let (lo_c, hi_c) = (-half_c, cols as i64 - half_c - 1);
        let reach = rows.max(cols) as f64;
        let step = 0.02;
        let samples = (reach / step).ceil() as i64;
        for j in 0..n_lines {
            let theta = j as f64 * PI / n_lines as f64;
            let (s, c) = theta.sin_cos();
            for t in -samples..=samples {
                let t = t as f64 * step;
                let a = (t * s).round() as i64;
                let b = (t * c).round() as i64;
                if a < lo_r || a > hi_r || b < lo_c || b > hi_c {
                    continue;
                }
                let k = a.rem_euclid(rows as i64) as usize;
                let l = b.rem_euclid(cols as i64) as usize;
                keep[k + l * rows] = true;
            }
        }
        keep[0] = true;
        Self::from_keep(rows, cols, keep)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn n_kept(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn fraction(&self) -> f64 {
        self.n_kept() as f64 / self.keep.len() as f64
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.keep.len()).all(|i| self.keep[i] == self.keep[partner(self.rows, self.cols, i)])
    }

    /// Indices of the kept bins in increasing order.
    pub fn kept_indices(&self) -> Vec<usize> {
        self.keep.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect()
    }
}
