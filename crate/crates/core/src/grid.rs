//! Grids, synthetic test signals, the Shepp-Logan phantom and error metrics.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// A real image on an `rows × cols` periodic grid, stored column-major.
///
/// One-dimensional signals are images with a single column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return param(format!("image dimensions must be positive, got {rows}x{cols}"));
        }
        if values.len() != rows * cols {
            return Err(Error::Dimension { expected: rows * cols, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return param(format!("non-finite value at index {i}"));
        }
        Ok(Self { rows, cols, values })
    }

    /// A 1D signal of length `values.len()`.
    pub fn signal(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(n, 1, values)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, values: vec![0.0; rows * cols] }
    }

    /// Builds an image from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                values.push(f(r, c));
            }
        }
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when one of the dimensions is 1.
    pub fn is_1d(&self) -> bool {
        self.rows == 1 || self.cols == 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row + col * self.rows]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.values)
    }

    /// Copy with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, values: self.values.iter().map(|v| v * c).collect() }
    }

    fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.shape() != other.shape() {
            return param(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        Ok(())
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn diff_norm2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Sorted support indices on a cyclic domain of length `period`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    indices: Vec<usize>,
    period: usize,
}

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, period: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return param("support indices must be distinct");
        }
        if let Some(&last) = indices.last() {
            if last >= period {
                return param(format!("support index {last} outside period {period}"));
            }
        }
        Ok(Self { indices, period })
    }

    /// Indices of the entries with magnitude above `tol`.
    pub fn from_nonzeros(x: &[f64], tol: f64) -> Self {
        let indices = x.iter().enumerate().filter(|(_, v)| v.abs() > tol).map(|(i, _)| i).collect();
        Self { indices, period: x.len() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Smallest wrap-around distance between two distinct support indices.
pub fn minimum_separation(support: &SupportSet) -> Result<usize> {
    if support.len() < 2 {
        return param("minimum separation needs at least two support indices");
    }
    let n = support.period;
    let idx = &support.indices;
    // Sorted, so the closest pair is adjacent or wraps from last to first.
    let mut best = n - (idx[idx.len() - 1] - idx[0]);
    for w in idx.windows(2) {
        let gap = w[1] - w[0];
        best = best.min(gap.min(n - gap));
    }
    Ok(best)
}

/// Step function of length `n`: the first and last `s` entries are 0 and the
/// middle `n - 2s` entries are 1.
pub fn make_one_bar(n: usize, s: usize) -> Result<Image> {
    if n == 0 || s == 0 || 2 * s > n {
        return param(format!("one-bar needs 1 <= s <= n/2, got n={n}, s={s}"));
    }
    let values = (0..n).map(|i| if i >= s && i < n - s { 1.0 } else { 0.0 }).collect();
    Image::signal(values)
}

/// Two-bar signal of length `n`: entries `s..2s` equal 2, the last `2s`
/// entries equal 1, every other entry equals the background level `t`.
pub fn make_two_bar(n: usize, s: usize, t: f64) -> Result<Image> {
    if s == 0 || 4 * s > n {
        return param(format!("two-bar needs 1 <= s and 4s <= n, got n={n}, s={s}"));
    }
    if !t.is_finite() {
        return param("two-bar background must be finite");
    }
    let values = (0..n)
        .map(|i| {
            if i >= n - 2 * s {
                1.0
            } else if i >= s && i < 2 * s {
                2.0
            } else {
                t
            }
        })
        .collect();
    Image::signal(values)
}

/// One ellipse of the phantom in normalized `[-1, 1]²` coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub intensity: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub angle_deg: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let dx = x - self.center_x;
        let dy = y - self.center_y;
        let xr = dx * c + dy * s;
        let yr = -dx * s + dy * c;
        (xr / self.semi_x).powi(2) + (yr / self.semi_y).powi(2) <= 1.0
    }
}

/// The ten ellipses of the modified Shepp-Logan phantom (Toft's contrast).
pub const MODIFIED_SHEPP_LOGAN: [Ellipse; 10] = [
    Ellipse { intensity: 1.0, semi_x: 0.69, semi_y: 0.92, center_x: 0.0, center_y: 0.0, angle_deg: 0.0 },
    Ellipse { intensity: -0.8, semi_x: 0.6624, semi_y: 0.874, center_x: 0.0, center_y: -0.0184, angle_deg: 0.0 },
    Ellipse { intensity: -0.2, semi_x: 0.11, semi_y: 0.31, center_x: 0.22, center_y: 0.0, angle_deg: -18.0 },
    Ellipse { intensity: -0.2, semi_x: 0.16, semi_y: 0.41, center_x: -0.22, center_y: 0.0, angle_deg: 18.0 },
    Ellipse { intensity: 0.1, semi_x: 0.21, semi_y: 0.25, center_x: 0.0, center_y: 0.35, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.046, semi_y: 0.046, center_x: 0.0, center_y: 0.1, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.046, semi_y: 0.046, center_x: 0.0, center_y: -0.1, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.046, semi_y: 0.023, center_x: -0.08, center_y: -0.605, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.023, semi_y: 0.023, center_x: 0.0, center_y: -0.606, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.023, semi_y: 0.046, center_x: 0.06, center_y: -0.605, angle_deg: 0.0 },
];

/// Normalized coordinates of a pixel center: `x` runs left to right over the
/// columns, `y` top to bottom from 1 to -1 over the rows.
pub fn pixel_coordinates(rows: usize, cols: usize, row: usize, col: usize) -> (f64, f64) {
    let half_c = (cols as f64 - 1.0) / 2.0;
    let half_r = (rows as f64 - 1.0) / 2.0;
    let x = (col as f64 - half_c) / half_c;
    let y = (half_r - row as f64) / half_r;
    (x, y)
}

/// Modified Shepp-Logan phantom sampled at pixel centers. Values lie in `[0, 1]`.
pub fn shepp_logan(rows: usize, cols: usize) -> Result<Image> {
    if rows < 16 || cols < 16 {
        return param(format!("phantom needs at least 16x16 pixels, got {rows}x{cols}"));
    }
    Ok(Image::from_fn(rows, cols, |r, c| {
        let (x, y) = pixel_coordinates(rows, cols, r, c);
        let v: f64 = MODIFIED_SHEPP_LOGAN
            .iter()
            .filter(|e| e.contains(x, y))
            .map(|e| e.intensity)
            .sum();
        // 1 - 0.8 - 0.2 leaves round-off around zero.
        v.clamp(0.0, 1.0)
    }))
}

/// Relative error and PSNR of a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub re: f64,
    pub psnr: f64,
    pub peak: f64,
}

impl Metrics {
    pub fn compute(estimate: &Image, truth: &Image) -> Result<Self> {
        Ok(Self { re: relative_error(estimate, truth)?, psnr: psnr(estimate, truth)?, peak: truth.max() })
    }
}

/// `‖u* − ũ‖₂ / ‖ũ‖₂`.
pub fn relative_error(estimate: &Image, truth: &Image) -> Result<f64> {
    estimate.check_same_shape(truth)?;
    let denom = truth.norm2();
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(diff_norm2(estimate.values(), truth.values()) / denom)
}

/// `10 log₁₀(N P² / ‖u* − ũ‖₂²)` with `P` the maximum of the ground truth.
/// Identical inputs give `+∞`.
pub fn psnr(estimate: &Image, truth: &Image) -> Result<f64> {
    estimate.check_same_shape(truth)?;
    let err2: f64 = estimate.values().iter().zip(truth.values()).map(|(a, b)| (a - b) * (a - b)).sum();
    if err2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = truth.max();
    Ok(10.0 * (truth.len() as f64 * peak * peak / err2).log10())
}
