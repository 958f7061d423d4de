//! Reproducible random streams.
//!
//! Every realization draws from its own ChaCha8 stream keyed by a 64-bit
//! master seed, so the amplitudes of realization `k` do not depend on how
//! many realizations ran before it or on which thread ran it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Master seed plus stream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub const fn new(seed: u64, stream: u64) -> Self {
        SeedSpec { seed, stream }
    }

    /// The generator for this (seed, stream) pair.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Seed of the `k`-th realization in a batch starting at this stream.
    pub fn realization(&self, k: usize) -> SeedSpec {
        SeedSpec { seed: self.seed, stream: self.stream.wrapping_add(k as u64) }
    }

    /// An independent family of streams derived from this one. Used where a
    /// single logical draw (e.g. a large bitstring sample) is split into
    /// blocks that may be generated concurrently.
    pub fn fork(&self, k: u64) -> SeedSpec {
        SeedSpec { seed: splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x5bd1_e995))), stream: k }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform variate on the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Two independent standard normal variates (polar Box-Muller).
pub fn normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}
