use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse FFT plans for one transform length.
///
/// Plans are immutable and shared behind `Arc`, so a `Fourier` can be cloned
/// freely and sent across threads. Scratch space is allocated per call.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fourier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward DFT, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse DFT including the `1/N` factor, so `inverse(forward(x)) == x`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    /// Unitary forward DFT (`1/sqrt(N)` scaling).
    pub fn forward_unitary(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        let scale = 1.0 / (self.n as f64).sqrt();
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    /// Unitary inverse DFT (`1/sqrt(N)` scaling).
    pub fn inverse_unitary(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / (self.n as f64).sqrt();
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    pub fn spectrum_of_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }
}

/// Linear operator diagonal in the DFT basis: `F^{-1} diag(gains) F`.
///
/// Gains are real, so the operator is Hermitian and is its own adjoint.
/// When the gains are also symmetric (`gains[k] == gains[N-k]`) real inputs
/// map to real outputs.
#[derive(Clone, Debug)]
pub struct SpectralMultiplier {
    fourier: Fourier,
    gains: Vec<f64>,
}

impl SpectralMultiplier {
    pub fn new(fourier: Fourier, gains: Vec<f64>) -> Self {
        assert_eq!(fourier.len(), gains.len(), "gain vector length must match FFT length");
        Self { fourier, gains }
    }

    pub fn identity(fourier: Fourier) -> Self {
        let n = fourier.len();
        Self::new(fourier, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    pub fn apply_in_place(&self, buf: &mut [Complex64]) {
        self.fourier.forward(buf);
        for (c, g) in buf.iter_mut().zip(&self.gains) {
            *c *= *g;
        }
        self.fourier.inverse(buf);
    }

    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut buf = z.to_vec();
        self.apply_in_place(&mut buf);
        buf
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.apply_in_place(&mut buf);
        buf
    }

    /// Real part of the operator applied to a real vector.
    pub fn apply_real_part(&self, x: &[f64]) -> Vec<f64> {
        self.apply_real(x).into_iter().map(|c| c.re).collect()
    }
}
