use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ChannelModel, ForwardModel, NoiseCovariance};
use crate::numerics::{Fourier, SpectralMultiplier};
use crate::seeds::{stream_rng, Stream};
use crate::{Error, Result};

/// Whitening gains are `1 / max(alpha, ASD_FLOOR_RATIO * sigma)`.
pub const ASD_FLOOR_RATIO: f64 = 1e-6;

/// Per-channel noise spectrum: amplitudes `asd[d][k]` in `[0, sigma)` and
/// phases in `[0, 2 pi)`, both conjugate-symmetric in `k`.
///
/// Spectra are expressed in the unitary DFT, so the noise energy equals
/// `sum_k asd[d][k]^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub asd: Vec<Vec<f64>>,
    pub phases: Vec<Vec<f64>>,
}

impl NoiseSpec {
    /// Draws `alpha ~ U(0, sigma)` and `phi ~ U(0, 2 pi)` independently per
    /// non-redundant bin. DC and Nyquist phases are restricted to `{0, pi}`.
    pub fn draw(n: usize, channels: usize, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!("noise scale sigma = {sigma} must be positive")));
        }
        if n < 2 {
            return Err(Error::TooShort { got: n, min: 2 });
        }
        let mut rng = stream_rng(seed, Stream::Noise);
        let mut asd = Vec::with_capacity(channels);
        let mut phases = Vec::with_capacity(channels);
        for _ in 0..channels {
            let mut a = vec![0.0; n];
            let mut p = vec![0.0; n];
            for k in 0..=n / 2 {
                a[k] = rng.gen_range(0.0..sigma);
                let self_conjugate = k == 0 || 2 * k == n;
                p[k] = if self_conjugate {
                    if rng.gen::<bool>() {
                        PI
                    } else {
                        0.0
                    }
                } else {
                    rng.gen_range(0.0..2.0 * PI)
                };
                if !self_conjugate {
                    a[n - k] = a[k];
                    p[n - k] = 2.0 * PI - p[k];
                }
            }
            asd.push(a);
            phases.push(p);
        }
        Ok(Self { sigma, asd, phases })
    }

    pub fn len(&self) -> usize {
        self.asd.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel_count(&self) -> usize {
        self.asd.len()
    }

    /// Inverse unitary DFT of `asd * exp(i phase)`, per channel.
    pub fn synthesize(&self, fourier: &Fourier) -> Vec<Vec<f64>> {
        self.asd
            .iter()
            .zip(&self.phases)
            .map(|(a, p)| {
                let mut buf: Vec<Complex64> = a.iter().zip(p).map(|(&m, &ph)| Complex64::from_polar(m, ph)).collect();
                fourier.inverse_unitary(&mut buf);
                buf.into_iter().map(|c| c.re).collect()
            })
            .collect()
    }
}

/// Draws a noise spectrum and synthesizes the time-domain noise.
pub fn sample_noise(n: usize, channels: usize, sigma: f64, seed: u64) -> Result<(NoiseSpec, Vec<Vec<f64>>)> {
    let spec = NoiseSpec::draw(n, channels, sigma, seed)?;
    let noise = spec.synthesize(&Fourier::new(n));
    Ok((spec, noise))
}

/// Mixing vectors with independent standard-normal entries.
pub fn draw_mixing(channels: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = stream_rng(seed, Stream::Channels);
    (0..channels).map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)]).collect()
}

#[derive(Clone, Debug)]
pub struct Whitening {
    pub model: ForwardModel,
    /// Number of clamped bins per channel.
    pub clamped: Vec<usize>,
}

/// Channels whose transforms divide each DFT bin by the noise amplitude.
pub fn whitening_channels(spec: &NoiseSpec, mixing: &[[f64; 2]]) -> Result<Whitening> {
    if mixing.len() != spec.channel_count() {
        return Err(Error::dim(format!("{} mixing vectors for {} noise channels", mixing.len(), spec.channel_count())));
    }
    let fourier = Fourier::new(spec.len());
    let floor = ASD_FLOOR_RATIO * spec.sigma;
    let mut clamped = Vec::with_capacity(mixing.len());
    let mut channels = Vec::with_capacity(mixing.len());
    for (asd, &r) in spec.asd.iter().zip(mixing) {
        let (gains, count) = whitening_gains(asd, floor);
        clamped.push(count);
        let transform = SpectralMultiplier::new(fourier.clone(), gains);
        channels.push(
            ChannelModel::new(transform, r)?.with_noise_covariance(NoiseCovariance::Stationary { asd: asd.clone() }),
        );
    }
    Ok(Whitening { model: ForwardModel::new(channels)?, clamped })
}

pub(crate) fn whitening_gains(asd: &[f64], floor: f64) -> (Vec<f64>, usize) {
    let mut count = 0;
    let gains = asd
        .iter()
        .map(|&a| {
            if a < floor {
                count += 1;
                1.0 / floor
            } else {
                1.0 / a
            }
        })
        .collect();
    (gains, count)
}
