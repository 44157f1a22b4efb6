use num_complex::Complex64;

use super::{all_finite, all_finite_complex, Fourier, SpectralMultiplier};
use crate::{Error, Result};

/// Frequency gains of the discrete analytic-signal filter.
///
/// `g[0] = 1`, `g[k] = 2` on strictly positive frequencies, `g[N/2] = 1` for
/// even `N` (Nyquist), zero on negative frequencies.
pub fn analytic_gains(n: usize) -> Vec<f64> {
    let mut g = vec![0.0; n];
    if n == 0 {
        return g;
    }
    g[0] = 1.0;
    let half = n / 2;
    if n.is_multiple_of(2) {
        g[1..half].iter_mut().for_each(|v| *v = 2.0);
        g[half] = 1.0;
    } else {
        g[1..=half].iter_mut().for_each(|v| *v = 2.0);
    }
    g
}

/// The operator `H` that suppresses negative frequencies.
///
/// `H = F^{-1} diag(g) F` with real `g`, hence `H^H = H` as an operator on
/// complex vectors. Note that `Re{H^H H}` restricted to real inputs has gain
/// 2 everywhere except DC and Nyquist, where it is 1.
#[derive(Clone, Debug)]
pub struct AnalyticFilter {
    multiplier: SpectralMultiplier,
}

impl AnalyticFilter {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_fourier(Fourier::new(n))
    }

    pub fn with_fourier(fourier: Fourier) -> Result<Self> {
        let n = fourier.len();
        if n < 2 {
            return Err(Error::TooShort { got: n, min: 2 });
        }
        Ok(Self { multiplier: SpectralMultiplier::new(fourier, analytic_gains(n)) })
    }

    pub fn len(&self) -> usize {
        self.multiplier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplier.is_empty()
    }

    pub fn gains(&self) -> &[f64] {
        self.multiplier.gains()
    }

    pub fn fourier(&self) -> &Fourier {
        self.multiplier.fourier()
    }

    /// Analytic signal of a real sequence, with input validation.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        if !all_finite(x) {
            return Err(Error::NonFinite("analytic transform input"));
        }
        Ok(self.apply_real(x))
    }

    /// `H^H z`, with input validation.
    pub fn adjoint(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(z.len())?;
        if !all_finite_complex(z) {
            return Err(Error::NonFinite("analytic adjoint input"));
        }
        Ok(self.apply(z))
    }

    /// `H x` for real `x`; no validation.
    pub fn apply_real(&self, x: &[f64]) -> Vec<Complex64> {
        self.multiplier.apply_real(x)
    }

    /// `H z` (equivalently `H^H z`) for complex `z`; no validation.
    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.multiplier.apply(z)
    }

    pub fn apply_in_place(&self, z: &mut [Complex64]) {
        self.multiplier.apply_in_place(z)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::dim(format!("analytic filter of length {} applied to length {got}", self.len())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gains_even_and_odd() {
        assert_eq!(analytic_gains(6), vec![1.0, 2.0, 2.0, 1.0, 0.0, 0.0]);
        assert_eq!(analytic_gains(5), vec![1.0, 2.0, 2.0, 0.0, 0.0]);
        assert_eq!(analytic_gains(2), vec![1.0, 1.0]);
    }

    #[test]
    fn cosine_becomes_complex_exponential() {
        let n = 64;
        let h = AnalyticFilter::new(n).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 8.0 * i as f64 / n as f64).cos()).collect();
        let xa = h.transform(&x).unwrap();
        for (i, c) in xa.iter().enumerate() {
            let expected = Complex64::from_polar(1.0, 2.0 * PI * 8.0 * i as f64 / n as f64);
            assert!((c - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_and_zero_inputs() {
        let h = AnalyticFilter::new(10).unwrap();
        let out = h.transform(&[3.5; 10]).unwrap();
        assert!(out.iter().all(|c| (c - Complex64::new(3.5, 0.0)).norm() < 1e-14));
        let out = h.transform(&[0.0; 10]).unwrap();
        assert!(out.iter().all(|c| c.norm() == 0.0));
        assert!(h.adjoint(&[Complex64::new(0.0, 0.0); 10]).unwrap().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn rejects_short_and_non_finite() {
        assert!(matches!(AnalyticFilter::new(1), Err(Error::TooShort { .. })));
        let h = AnalyticFilter::new(4).unwrap();
        assert!(matches!(h.transform(&[1.0, f64::NAN, 0.0, 0.0]), Err(Error::NonFinite(_))));
        assert!(matches!(h.transform(&[1.0; 5]), Err(Error::Dimension(_))));
    }

    #[test]
    fn real_part_reproduces_input() {
        let n = 33;
        let h = AnalyticFilter::new(n).unwrap();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let xa = h.transform(&x).unwrap();
        for (a, b) in xa.iter().zip(&x) {
            assert!((a.re - b).abs() < 1e-12);
        }
    }
}
