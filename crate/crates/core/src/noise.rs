//! Seeded random sources.
//!
//! Every source is a ChaCha stream keyed by a 64-bit seed and a 64-bit
//! stream id. Stream ids are derived by hashing small tuples (run, arm,
//! purpose), so independent consumers never share generator state and a
//! run replays bit-for-bit on any platform.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::{Error, Result};

/// Purpose tags mixed into stream ids.
pub mod purpose {
    pub const REWARD: u64 = 0x7265_7761_7264;
    pub const ARRAY_NOISE: u64 = 0x0061_7272_6179;
    pub const TREE_NOISE: u64 = 0x7472_6565;
    pub const SELECTION_NOISE: u64 = 0x0072_6e6d;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a tuple of integers.
pub fn derive_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6a09_e667_f3bc_c908, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    /// Stream whose id is the hash of `parts`.
    pub fn derived(seed: u64, parts: &[u64]) -> Self {
        Self::new(seed, derive_id(parts))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn open_uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.gen()
    }
}

/// Whether Laplace draws are real or forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    #[default]
    Live,
    /// Every Laplace draw returns exactly 0. Used for oracle-equivalence
    /// tests against non-private algorithms.
    Zeroed,
}

/// Inverse CDF of `Lap(scale)` at `u` in `(-1/2, 1/2)`.
#[inline]
pub fn laplace_from_centered_uniform(scale: f64, u: f64) -> f64 {
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "Laplace scale must be positive and finite, got {scale}"
        )))
    }
}

/// One draw from the Laplace distribution centred at 0 with the given scale.
pub fn laplace(scale: f64, rng: &mut RngStream) -> Result<f64> {
    check_scale(scale)?;
    let u = rng.open_uniform() - 0.5;
    Ok(laplace_from_centered_uniform(scale, u))
}

/// Returns 1.0 with probability `p`, else 0.0.
pub fn bernoulli(p: f64, rng: &mut RngStream) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "Bernoulli mean must lie in [0, 1], got {p}"
        )));
    }
    Ok(if rng.uniform() < p { 1.0 } else { 0.0 })
}

/// Laplace sampler owning its stream, honouring [`NoiseMode`].
#[derive(Debug, Clone)]
pub struct LaplaceNoise {
    rng: RngStream,
    mode: NoiseMode,
    draws: u64,
}

impl LaplaceNoise {
    pub fn new(rng: RngStream, mode: NoiseMode) -> Self {
        Self {
            rng,
            mode,
            draws: 0,
        }
    }

    pub fn zeroed() -> Self {
        Self::new(RngStream::new(0, 0), NoiseMode::Zeroed)
    }

    pub fn mode(&self) -> NoiseMode {
        self.mode
    }

    /// Number of draws requested so far, including zeroed ones.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn sample(&mut self, scale: f64) -> Result<f64> {
        check_scale(scale)?;
        self.draws += 1;
        match self.mode {
            NoiseMode::Zeroed => Ok(0.0),
            NoiseMode::Live => laplace(scale, &mut self.rng),
        }
    }
}

/// Hands out per-(consumer, purpose) Laplace sources under one seed.
#[derive(Debug, Clone, Copy)]
pub struct NoiseFactory {
    pub seed: u64,
    pub mode: NoiseMode,
}

impl NoiseFactory {
    pub fn new(seed: u64, mode: NoiseMode) -> Self {
        Self { seed, mode }
    }

    pub fn source(&self, index: u64, purpose: u64) -> LaplaceNoise {
        LaplaceNoise::new(RngStream::derived(self.seed, &[index, purpose]), self.mode)
    }
}
