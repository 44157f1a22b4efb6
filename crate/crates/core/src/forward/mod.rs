//! The D-channel measurement model `y_d = T_d X r_d + noise`.
//!
//! Each `T_d` is diagonal in the DFT basis. In the simulated pipeline the
//! raw channel data `X r_d + e_d` carries colored noise with amplitude
//! spectral density `alpha_d`, and `T_d = diag(1/alpha_d)` whitens it, so the
//! observations handed to the solver are `T_d X r_d + T_d e_d` with a flat
//! noise spectrum.

mod bundle;
mod noise;

pub use bundle::{simulate, ChannelEntry, ChannelManifest, ObservationBundle, Simulation, CHANNEL_HEADER};
pub use noise::{draw_mixing, sample_noise, whitening_channels, NoiseSpec, Whitening, ASD_FLOOR_RATIO};

use crate::numerics::{Fourier, SpectralMultiplier};
use crate::signal::BivariateSignal;
use crate::{Error, Result};

/// Noise covariance descriptor. Carried as metadata; the data-fidelity term
/// is always the plain squared norm of the (whitened) residual.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseCovariance {
    Identity,
    /// Stationary noise with the given amplitude spectral density.
    Stationary {
        asd: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct ChannelModel {
    transform: SpectralMultiplier,
    mixing: [f64; 2],
    noise_covariance: NoiseCovariance,
}

impl ChannelModel {
    pub fn new(transform: SpectralMultiplier, mixing: [f64; 2]) -> Result<Self> {
        if !mixing.iter().all(|m| m.is_finite()) || mixing == [0.0, 0.0] {
            return Err(Error::param(format!("mixing vector {mixing:?} must be finite and nonzero")));
        }
        if !transform.gains().iter().all(|g| g.is_finite() && *g != 0.0) {
            return Err(Error::param("channel transform gains must be finite and nonzero"));
        }
        Ok(Self { transform, mixing, noise_covariance: NoiseCovariance::Identity })
    }

    pub fn identity(fourier: Fourier, mixing: [f64; 2]) -> Result<Self> {
        Self::new(SpectralMultiplier::identity(fourier), mixing)
    }

    pub fn with_noise_covariance(mut self, cov: NoiseCovariance) -> Self {
        self.noise_covariance = cov;
        self
    }

    pub fn transform(&self) -> &SpectralMultiplier {
        &self.transform
    }

    pub fn mixing(&self) -> [f64; 2] {
        self.mixing
    }

    pub fn noise_covariance(&self) -> &NoiseCovariance {
        &self.noise_covariance
    }

    pub fn len(&self) -> usize {
        self.transform.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transform.is_empty()
    }
}

/// The stacked operator `Phi(X) = (T_d X r_d)_d`.
#[derive(Clone, Debug)]
pub struct ForwardModel {
    fourier: Fourier,
    channels: Vec<ChannelModel>,
}

impl ForwardModel {
    pub fn new(channels: Vec<ChannelModel>) -> Result<Self> {
        let first = channels.first().ok_or_else(|| Error::param("forward model needs at least one channel"))?;
        let n = first.len();
        if n < 2 {
            return Err(Error::TooShort { got: n, min: 2 });
        }
        if let Some(bad) = channels.iter().find(|c| c.len() != n) {
            return Err(Error::dim(format!("channel lengths {n} and {}", bad.len())));
        }
        let fourier = first.transform().fourier().clone();
        Ok(Self { fourier, channels })
    }

    pub fn len(&self) -> usize {
        self.fourier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fourier.is_empty()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[ChannelModel] {
        &self.channels
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    pub fn apply_forward(&self, x: &BivariateSignal) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.len() {
            return Err(Error::dim(format!("model has {} samples, signal {}", self.len(), x.len())));
        }
        Ok(self.forward_columns(x.columns()))
    }

    /// `T_d (u r_d[0] + v r_d[1])` for every channel; no validation.
    pub fn forward_columns(&self, x: [&[f64]; 2]) -> Vec<Vec<f64>> {
        self.channels
            .iter()
            .map(|ch| {
                let [a, b] = ch.mixing;
                let mixed: Vec<f64> = x[0].iter().zip(x[1]).map(|(u, v)| a * u + b * v).collect();
                ch.transform.apply_real_part(&mixed)
            })
            .collect()
    }

    /// `sum_d Re{T_d^H res_d} r_d^T`, returned as the two columns.
    pub fn apply_adjoint(&self, residuals: &[Vec<f64>]) -> Result<[Vec<f64>; 2]> {
        if residuals.len() != self.channel_count() {
            return Err(Error::dim(format!("{} channels, {} residual vectors", self.channel_count(), residuals.len())));
        }
        if let Some(bad) = residuals.iter().find(|r| r.len() != self.len()) {
            return Err(Error::dim(format!("residual of length {}, expected {}", bad.len(), self.len())));
        }
        Ok(self.adjoint_unchecked(residuals))
    }

    pub(crate) fn adjoint_unchecked(&self, residuals: &[Vec<f64>]) -> [Vec<f64>; 2] {
        let n = self.len();
        let mut out = [vec![0.0; n], vec![0.0; n]];
        for (ch, res) in self.channels.iter().zip(residuals) {
            let back = ch.transform.apply_real_part(res);
            for c in 0..2 {
                let r = ch.mixing[c];
                out[c].iter_mut().zip(&back).for_each(|(o, b)| *o += r * b);
            }
        }
        out
    }

    /// Per-bin 2×2 Gram matrices `sum_d g_d[k]^2 r_d r_d^T`, so that
    /// `Phi^H Phi` acts on the DFT of `X` row by row.
    pub fn bin_gram(&self) -> Vec<[[f64; 2]; 2]> {
        let mut out = vec![[[0.0; 2]; 2]; self.len()];
        for ch in &self.channels {
            let r = ch.mixing;
            for (k, g) in ch.transform.gains().iter().enumerate() {
                let g2 = g * g;
                for i in 0..2 {
                    for j in 0..2 {
                        out[k][i][j] += g2 * r[i] * r[j];
                    }
                }
            }
        }
        out
    }
}
