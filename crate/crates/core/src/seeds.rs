//! Named random sub-streams.
//!
//! A single user seed drives every random component; each component reads
//! from its own ChaCha stream so that, for instance, the noise draw does not
//! shift when the signal generator changes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Signal,
    Noise,
    Channels,
    Init,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Signal => 1,
            Stream::Noise => 2,
            Stream::Channels => 3,
            Stream::Init => 4,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Deterministic 64-bit seed from a base seed and a list of labels.
///
/// Stable across platforms and toolchains (SHA-256 of a canonical string).
pub fn derive_seed(base: u64, labels: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    for label in labels {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
