use rustfft::num_complex::Complex64;

use super::{Fft2, FrequencyMask, MeasurementOperator};

/// Unitary DFT followed by selection of the bins kept by a mask.
#[derive(Debug, Clone)]
pub struct FourierSampling {
    mask: FrequencyMask,
    kept: Vec<usize>,
    fft: Fft2,
    spectrum: Vec<f64>,
}

impl FourierSampling {
    pub fn new(mask: FrequencyMask) -> Self {
        let kept = mask.kept_indices();
        let fft = Fft2::new(mask.rows(), mask.cols());
        let spectrum = mask.keep().iter().map(|&k| if k { 1.0 } else { 0.0 }).collect();
        Self { mask, kept, fft, spectrum }
    }

    /// Kept bins as complex numbers.
    pub fn complex_data(&self, data: &[f64]) -> Vec<Complex64> {
        data.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
    }

    pub fn kept_indices(&self) -> &[usize] {
        &self.kept
    }
}

impl MeasurementOperator for FourierSampling {
    fn name(&self) -> &'static str {
        "fourier"
    }

    fn shape(&self) -> (usize, usize) {
        (self.mask.rows(), self.mask.cols())
    }

    fn data_len(&self) -> usize {
        2 * self.kept.len()
    }

    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let spec = self.fft.forward_real(u);
        for (pair, &i) in out.chunks_exact_mut(2).zip(&self.kept) {
            pair[0] = spec[i].re;
            pair[1] = spec[i].im;
        }
    }

    fn adjoint_into(&self, v: &[f64], out: &mut [f64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft.len()];
        for (pair, &i) in v.chunks_exact(2).zip(&self.kept) {
            buf[i] = Complex64::new(pair[0], pair[1]);
        }
        self.fft.inverse(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re;
        }
    }

    fn gram_spectrum(&self) -> Option<&[f64]> {
        Some(&self.spectrum)
    }

    fn mask(&self) -> Option<&FrequencyMask> {
        Some(&self.mask)
    }
}
