//! Parallel-beam projection assembled as an explicit sparse matrix.
//!
//! Pixels are unit squares centered on the origin of the image plane, with
//! `x` running along the columns and `y` pointing up (row 0 on top). For the
//! projection angle `θ` and detector offset `s`, the ray is the line
//! `x cos θ + y sin θ = s`, and its weight on a pixel is the length of the
//! ray segment inside that pixel. Detectors have unit spacing and are
//! centered on the rotation axis.

use serde::{Deserialize, Serialize};

use super::{CsrMatrix, MeasurementOperator};
use crate::error::{param, Error, Result};

/// Projection data, one row of detector readings per angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sinogram {
    pub n_angles: usize,
    pub n_detectors: usize,
    /// Radians, strictly increasing in `[0, π)`.
    pub angles: Vec<f64>,
    /// Angle-major: reading `(a, d)` lives at `a * n_detectors + d`.
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn new(angles: Vec<f64>, n_detectors: usize, values: Vec<f64>) -> Result<Self> {
        validate_angles(&angles)?;
        let expected = angles.len() * n_detectors;
        if values.len() != expected {
            return Err(Error::Dimension { expected, got: values.len() });
        }
        Ok(Self { n_angles: angles.len(), n_detectors, angles, values })
    }
}

fn validate_angles(angles: &[f64]) -> Result<()> {
    if angles.is_empty() {
        return param("projection angle list is empty");
    }
    if angles.iter().any(|a| !(0.0..std::f64::consts::PI).contains(a)) {
        return param("projection angles must lie in [0, pi)");
    }
    if angles.windows(2).any(|w| w[1] <= w[0]) {
        return param("projection angles must be strictly increasing");
    }
    Ok(())
}

/// `count` equispaced angles covering `[0, max_deg]` degrees, in radians.
pub fn limited_angles(max_deg: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    (0..count).map(|k| (k as f64 * max_deg / (count - 1) as f64).to_radians()).collect()
}

#[derive(Debug, Clone)]
pub struct RadonOperator {
    rows: usize,
    cols: usize,
    angles: Vec<f64>,
    n_detectors: usize,
    matrix: CsrMatrix,
    transpose: CsrMatrix,
}

impl RadonOperator {
    pub fn new(rows: usize, cols: usize, angles: Vec<f64>, n_detectors: usize) -> Result<Self> {
        validate_angles(&angles)?;
        if rows == 0 || cols == 0 || n_detectors == 0 {
            return param("Radon operator needs positive image and detector sizes");
        }
        let mut ray_rows = Vec::with_capacity(angles.len() * n_detectors);
        for &theta in &angles {
            for d in 0..n_detectors {
                let s = d as f64 - (n_detectors as f64 - 1.0) / 2.0;
                ray_rows.push(trace_ray(rows, cols, theta, s));
            }
        }
        let matrix = CsrMatrix::from_rows(rows * cols, ray_rows);
        let transpose = matrix.transpose();
        Ok(Self { rows, cols, angles, n_detectors, matrix, transpose })
    }

    /// Limited-angle geometry: `count` angles over `[0, max_deg]`.
    pub fn limited_angle(size: usize, max_deg: f64, count: usize, n_detectors: usize) -> Result<Self> {
        if !(max_deg > 0.0 && max_deg < 180.0) {
            return param(format!("scan range must lie in (0, 180) degrees, got {max_deg}"));
        }
        Self::new(size, size, limited_angles(max_deg, count), n_detectors)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn n_detectors(&self) -> usize {
        self.n_detectors
    }

    pub fn sinogram(&self, data: Vec<f64>) -> Result<Sinogram> {
        Sinogram::new(self.angles.clone(), self.n_detectors, data)
    }
}

/// Siddon-style exact intersection lengths of one ray with the pixel grid.
fn trace_ray(rows: usize, cols: usize, theta: f64, s: f64) -> Vec<(usize, f64)> {
    let (sin, cos) = theta.sin_cos();
    // Ray: p(t) = s (cos, sin) + t (-sin, cos).
    let (px, py) = (s * cos, s * sin);
    let (dx, dy) = (-sin, cos);
    let (half_w, half_h) = (cols as f64 / 2.0, rows as f64 / 2.0);
    const EPS: f64 = 1e-12;

    // Axis-aligned ray running along a pixel edge: split it evenly between
    // the two neighbouring pixel lines.
    let on_edge = |p: f64, half: f64| (p + half - (p + half).round()).abs() < 1e-9;
    if (dx.abs() < EPS && on_edge(px, half_w)) || (dy.abs() < EPS && on_edge(py, half_h)) {
        const SHIFT: f64 = 1e-6;
        let mut out = trace_ray(rows, cols, theta, s - SHIFT);
        out.extend(trace_ray(rows, cols, theta, s + SHIFT));
        for e in &mut out {
            e.1 *= 0.5;
        }
        return out;
    }

    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (p, d, half) in [(px, dx, half_w), (py, dy, half_h)] {
        if d.abs() < EPS {
            if p <= -half || p >= half {
                return Vec::new();
            }
        } else {
            let (a, b) = ((-half - p) / d, (half - p) / d);
            t_lo = t_lo.max(a.min(b));
            t_hi = t_hi.min(a.max(b));
        }
    }
    if t_hi - t_lo <= EPS {
        return Vec::new();
    }

    let mut ts = vec![t_lo, t_hi];
    if dx.abs() >= EPS {
        for i in 0..=cols {
            let t = (i as f64 - half_w - px) / dx;
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    if dy.abs() >= EPS {
        for j in 0..=rows {
            let t = (j as f64 - half_h - py) / dy;
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    ts.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let mut out = Vec::with_capacity(ts.len());
    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= EPS {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let x = px + tm * dx;
        let y = py + tm * dy;
        let col = ((x + half_w).floor() as isize).clamp(0, cols as isize - 1) as usize;
        let row = ((half_h - y).floor() as isize).clamp(0, rows as isize - 1) as usize;
        out.push((row + col * rows, len));
    }
    out
}

impl MeasurementOperator for RadonOperator {
    fn name(&self) -> &'static str {
        "radon"
    }

    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn data_len(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        self.matrix.matvec_into(u, out);
    }

    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) {
        self.transpose.matvec_into(v, out);
    }

    fn matrix(&self) -> Option<&CsrMatrix> {
        Some(&self.matrix)
    }
}
