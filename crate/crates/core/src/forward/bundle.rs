use std::path::Path;

use serde::{Deserialize, Serialize};

use super::noise::{draw_mixing, whitening_channels, whitening_gains, NoiseSpec, ASD_FLOOR_RATIO};
use super::{ChannelModel, ForwardModel, NoiseCovariance};
use crate::io::{create_csv, format_err, io_err, open_csv, read_json, write_json};
use crate::numerics::{Fourier, SpectralMultiplier};
use crate::signal::BivariateSignal;
use crate::{Error, Result};

pub const CHANNEL_HEADER: [&str; 2] = ["n", "y"];
const MANIFEST_FILE: &str = "channels.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelEntry {
    pub mixing: [f64; 2],
    /// Noise amplitude spectral density (unitary DFT bins). Absent means the
    /// channel transform is the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asd: Option<Vec<f64>>,
}

/// Everything needed to rebuild the forward operator exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelManifest {
    pub n: usize,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Lower clamp applied to `asd` before inversion.
    #[serde(default)]
    pub asd_floor: Option<f64>,
    pub channels: Vec<ChannelEntry>,
}

impl ChannelManifest {
    pub fn to_model(&self) -> Result<ForwardModel> {
        let fourier = Fourier::new(self.n);
        let floor = self.asd_floor.or(self.sigma.map(|s| ASD_FLOOR_RATIO * s)).unwrap_or(0.0);
        let channels = self
            .channels
            .iter()
            .map(|entry| match &entry.asd {
                None => ChannelModel::identity(fourier.clone(), entry.mixing),
                Some(asd) => {
                    if asd.len() != self.n {
                        return Err(Error::dim(format!("asd of length {}, manifest n = {}", asd.len(), self.n)));
                    }
                    let (gains, _) = whitening_gains(asd, floor);
                    Ok(ChannelModel::new(SpectralMultiplier::new(fourier.clone(), gains), entry.mixing)?
                        .with_noise_covariance(NoiseCovariance::Stationary { asd: asd.clone() }))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        ForwardModel::new(channels)
    }
}

/// Channel observations plus the manifest that defines their operator.
///
/// On disk: a directory holding `channels.json` and one `channel_<d>.csv`
/// (`n,y`) per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationBundle {
    pub manifest: ChannelManifest,
    pub observations: Vec<Vec<f64>>,
}

impl ObservationBundle {
    pub fn channel_file(d: usize) -> String {
        format!("channel_{d}.csv")
    }

    pub fn model(&self) -> Result<ForwardModel> {
        self.manifest.to_model()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_json(&dir.join(MANIFEST_FILE), &self.manifest)?;
        for (d, y) in self.observations.iter().enumerate() {
            let path = dir.join(Self::channel_file(d));
            let mut w = create_csv(&path)?;
            w.write_record(CHANNEL_HEADER)?;
            for (i, v) in y.iter().enumerate() {
                w.serialize((i, v))?;
            }
            w.flush().map_err(io_err(&path))?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let manifest: ChannelManifest = read_json(&dir.join(MANIFEST_FILE))?;
        let mut observations = Vec::with_capacity(manifest.channels.len());
        for d in 0..manifest.channels.len() {
            let path = dir.join(Self::channel_file(d));
            let mut reader = open_csv(&path, &CHANNEL_HEADER)?;
            let mut y = Vec::with_capacity(manifest.n);
            for (i, row) in reader.deserialize::<(usize, f64)>().enumerate() {
                let (n, v) = row?;
                if n != i {
                    return Err(format_err(&path, format!("row {i} carries sample index {n}")));
                }
                if !v.is_finite() {
                    return Err(format_err(&path, format!("non-finite value at row {i}")));
                }
                y.push(v);
            }
            if y.len() != manifest.n {
                return Err(format_err(&path, format!("{} samples, manifest says {}", y.len(), manifest.n)));
            }
            observations.push(y);
        }
        Ok(Self { manifest, observations })
    }
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub bundle: ObservationBundle,
    pub model: ForwardModel,
    pub noise: NoiseSpec,
    pub clamped: Vec<usize>,
}

/// Simulates whitened observations of `x` in `channels` channels:
/// standard-normal mixing vectors, uniform random noise spectra of scale
/// `sigma`, and `y_d = T_d (X r_d + e_d)`.
pub fn simulate(x: &BivariateSignal, sigma: f64, channels: usize, seed: u64) -> Result<Simulation> {
    if channels == 0 {
        return Err(Error::param("at least one channel is required"));
    }
    let n = x.len();
    let mixing = draw_mixing(channels, seed);
    let noise = NoiseSpec::draw(n, channels, sigma, seed)?;
    let fourier = Fourier::new(n);
    let eps = noise.synthesize(&fourier);
    let whitening = whitening_channels(&noise, &mixing)?;
    let observations = whitening
        .model
        .channels()
        .iter()
        .zip(&eps)
        .map(|(ch, e)| {
            let [a, b] = ch.mixing();
            let raw: Vec<f64> = x.u().iter().zip(x.v()).zip(e).map(|((u, v), e)| a * u + b * v + e).collect();
            ch.transform().apply_real_part(&raw)
        })
        .collect();
    let manifest = ChannelManifest {
        n,
        sigma: Some(sigma),
        seed: Some(seed),
        asd_floor: Some(ASD_FLOOR_RATIO * sigma),
        channels: mixing
            .iter()
            .zip(&noise.asd)
            .map(|(&m, a)| ChannelEntry { mixing: m, asd: Some(a.clone()) })
            .collect(),
    };
    Ok(Simulation {
        bundle: ObservationBundle { manifest, observations },
        model: whitening.model,
        noise,
        clamped: whitening.clamped,
    })
}
