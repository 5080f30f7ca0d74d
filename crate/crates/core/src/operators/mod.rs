//! Linear operators with matched adjoints.
//!
//! Every [`MeasurementOperator`] maps a real image to a real data vector.
//! Complex Fourier samples are stored as interleaved `(re, im)` pairs, so the
//! real inner product on the data side equals the real part of the complex
//! one.

mod fft;
mod fourier;
mod gradient;
mod mask;
mod radon;
mod sparse;

pub use fft::Fft2;
pub use fourier::FourierSampling;
pub use gradient::{
    field_len, gradient_adjoint, gradient_adjoint_into, gradient_apply, gradient_gram_spectrum, gradient_into,
    GradientField,
};
pub use mask::FrequencyMask;
pub use radon::{RadonOperator, Sinogram};
pub use sparse::CsrMatrix;

use crate::grid::Image;

/// A linear map `A` from images of a fixed shape to data vectors.
pub trait MeasurementOperator: Send + Sync {
    /// Short tag used in logs and result tables.
    fn name(&self) -> &'static str;

    /// Image shape `(rows, cols)` of the domain.
    fn shape(&self) -> (usize, usize);

    /// Length of a data vector.
    fn data_len(&self) -> usize;

    fn apply_into(&self, u: &[f64], out: &mut [f64]);

    fn adjoint_into(&self, v: &[f64], out: &mut [f64]);

    /// Eigenvalues of `AᵀA` over the DFT grid when `AᵀA` is diagonalized by
    /// the unitary DFT.
    fn gram_spectrum(&self) -> Option<&[f64]> {
        None
    }

    /// Sampling mask, for Fourier operators.
    fn mask(&self) -> Option<&FrequencyMask> {
        None
    }

    /// Explicit system matrix, when assembled.
    fn matrix(&self) -> Option<&CsrMatrix> {
        None
    }

    fn apply(&self, u: &Image) -> Vec<f64> {
        let mut out = vec![0.0; self.data_len()];
        self.apply_into(u.values(), &mut out);
        out
    }

    fn adjoint(&self, v: &[f64]) -> Image {
        let (rows, cols) = self.shape();
        let mut out = Image::zeros(rows, cols);
        self.adjoint_into(v, out.values_mut());
        out
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
