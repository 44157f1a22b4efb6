use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use super::BivariateSignal;
use crate::seeds::{stream_rng, Stream};
use crate::{Error, Result};

/// Instantaneous ellipse parameters of a polarized signal.
///
/// `orientation` is the major-axis angle, `ellipticity` the angle whose
/// tangent is the minor/major axis ratio (signed by handedness), `frequency`
/// in cycles per sample and `phase` the running integral of the frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipseTrack {
    pub amplitude: Vec<f64>,
    pub orientation: Vec<f64>,
    pub ellipticity: Vec<f64>,
    pub frequency: Vec<f64>,
    pub phase: Vec<f64>,
}

impl EllipseTrack {
    /// Track with every parameter held constant; the phase advances by
    /// `2 pi f` per sample starting from `phase0`.
    pub fn constant(n: usize, amplitude: f64, orientation: f64, ellipticity: f64, frequency: f64, phase0: f64) -> Self {
        let frequency = vec![frequency; n];
        Self {
            amplitude: vec![amplitude; n],
            orientation: vec![orientation; n],
            ellipticity: vec![ellipticity; n],
            phase: integrate_phase(&frequency, phase0),
            frequency,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }

    /// Evaluates `[u, v] = a R(theta) [cos chi cos phi, sin chi sin phi]`.
    pub fn to_signal(&self) -> Result<BivariateSignal> {
        let n = self.len();
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.amplitude[i];
            let (st, ct) = self.orientation[i].sin_cos();
            let (sc, cc) = self.ellipticity[i].sin_cos();
            let (sp, cp) = self.phase[i].sin_cos();
            u.push(a * (ct * cc * cp - st * sc * sp));
            v.push(a * (st * cc * cp + ct * sc * sp));
        }
        BivariateSignal::new(u, v)
    }
}

fn integrate_phase(frequency: &[f64], phase0: f64) -> Vec<f64> {
    let mut phase = Vec::with_capacity(frequency.len());
    let mut acc = phase0;
    for (i, f) in frequency.iter().enumerate() {
        if i > 0 {
            acc += 2.0 * PI * f;
        }
        phase.push(acc);
    }
    phase
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    /// Frequency band in cycles per sample.
    pub band: (f64, f64),
    /// Standard deviation, in samples, of the Gaussian kernel that smooths
    /// the parameter tracks. `None` means `n / 20`.
    pub smoothing: Option<f64>,
    pub seed: u64,
}

impl GeneratorConfig {
    /// Default band: 25 to 35 cycles over the record.
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, band: (25.0 / n as f64, 35.0 / n as f64), smoothing: None, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 64 {
            return Err(Error::TooShort { got: self.n, min: 64 });
        }
        let (lo, hi) = self.band;
        if !(lo > 0.0 && lo <= hi && hi < 0.5) {
            return Err(Error::param(format!("band ({lo}, {hi}) must satisfy 0 < lo <= hi < 0.5")));
        }
        if let Some(s) = self.smoothing {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::param(format!("smoothing width {s} must be positive")));
            }
        }
        Ok(())
    }
}

/// Synthetic polarized signal with slowly varying ellipse parameters.
///
/// Each of amplitude, orientation, ellipticity and frequency is white
/// Gaussian noise smoothed by a Gaussian kernel, then mapped affinely onto
/// its range: amplitude `[0.5, 1.5]`, orientation a `pi/2` window centred at
/// a random angle in `[-pi/4, pi/4)`, ellipticity `[-pi/4, pi/4]`, frequency
/// the configured band.
pub fn generate_signal(config: &GeneratorConfig) -> Result<(BivariateSignal, EllipseTrack)> {
    config.validate()?;
    let n = config.n;
    let width = config.smoothing.unwrap_or(n as f64 / 20.0);
    let mut rng = stream_rng(config.seed, Stream::Signal);

    let amplitude = rescale(&smooth_track(&mut rng, n, width), 0.5, 1.5);
    let centre = rng.gen_range(-FRAC_PI_4..FRAC_PI_4);
    let orientation = rescale(&smooth_track(&mut rng, n, width), centre - FRAC_PI_4, centre + FRAC_PI_4);
    let ellipticity = rescale(&smooth_track(&mut rng, n, width), -FRAC_PI_4, FRAC_PI_4);
    let frequency = rescale(&smooth_track(&mut rng, n, width), config.band.0, config.band.1);
    let phase0 = rng.gen_range(0.0..2.0 * PI);
    let phase = integrate_phase(&frequency, phase0);

    let track = EllipseTrack { amplitude, orientation, ellipticity, frequency, phase };
    debug_assert!(track.orientation.iter().all(|t| (-FRAC_PI_2..FRAC_PI_2).contains(t)));
    Ok((track.to_signal()?, track))
}

/// White noise convolved with a unit-sum Gaussian kernel (valid part only).
fn smooth_track<R: Rng>(rng: &mut R, n: usize, width: f64) -> Vec<f64> {
    let half = (4.0 * width).ceil() as usize;
    let kernel: Vec<f64> = (0..=2 * half)
        .map(|k| {
            let t = (k as f64 - half as f64) / width;
            (-0.5 * t * t).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    let white: Vec<f64> = (0..n + 2 * half).map(|_| rng.sample(StandardNormal)).collect();
    (0..n).map(|i| white[i..i + kernel.len()].iter().zip(&kernel).map(|(w, k)| w * k).sum::<f64>() / norm).collect()
}

fn rescale(track: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let min = track.iter().copied().fold(f64::INFINITY, f64::min);
    let max = track.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    track
        .iter()
        .map(|t| {
            let unit = if span > 0.0 { (t - min) / span } else { 0.5 };
            (lo + (hi - lo) * unit).clamp(lo, hi)
        })
        .collect()
}
