//! Bivariate signals, their polarization description and quality metrics.

mod covariance;
mod generator;
mod io;

pub use covariance::{
    covariance_smoothness, determinant, hermitian_eigenvalues, instantaneous_covariance, trace, Covariance2,
    CovarianceTrack,
};
pub use generator::{generate_signal, EllipseTrack, GeneratorConfig};
pub use io::{read_signal_csv, write_signal_csv, write_track_csv, SIGNAL_HEADER, TRACK_HEADER};

use crate::numerics::{all_finite, norm_sq};
use crate::{Error, Result};

/// An `N×2` real time series `[u, v]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateSignal {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl BivariateSignal {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::dim(format!("columns of length {} and {}", u.len(), v.len())));
        }
        if u.len() < 2 {
            return Err(Error::TooShort { got: u.len(), min: 2 });
        }
        if !all_finite(&u) || !all_finite(&v) {
            return Err(Error::NonFinite("bivariate signal"));
        }
        Ok(Self { u, v })
    }

    pub fn from_columns(columns: [Vec<f64>; 2]) -> Result<Self> {
        let [u, v] = columns;
        Self::new(u, v)
    }

    pub fn zeros(n: usize) -> Self {
        Self { u: vec![0.0; n], v: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn columns(&self) -> [&[f64]; 2] {
        [&self.u, &self.v]
    }

    pub fn into_columns(self) -> [Vec<f64>; 2] {
        [self.u, self.v]
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        norm_sq(&self.u) + norm_sq(&self.v)
    }
}

/// Reconstruction SNR in dB, `10 log10(||X||^2 / ||X - X_hat||^2)`.
///
/// Returns `f64::INFINITY` when the estimate is exact.
pub fn r_snr(reference: &BivariateSignal, estimate: &BivariateSignal) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::dim(format!("reference has {} samples, estimate {}", reference.len(), estimate.len())));
    }
    let energy = reference.frobenius_norm_sq();
    if energy == 0.0 {
        return Err(Error::ZeroReference);
    }
    let err: f64 = reference
        .columns()
        .iter()
        .zip(estimate.columns())
        .flat_map(|(r, e)| r.iter().zip(e).map(|(a, b)| (a - b) * (a - b)))
        .sum();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (energy / err).log10())
}
