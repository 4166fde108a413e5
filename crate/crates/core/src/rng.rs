//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator seeded from a single `u64`. The
//! generator output is specified by the ChaCha algorithm rather than by the
//! platform, so a given seed reproduces the same draws everywhere.
//!
//! Sub-streams are derived from the *seed* of their parent, never from its
//! current state, so a child stream does not depend on how many numbers the
//! parent has already produced. The mixing function is
//!
//! ```text
//! child_seed = splitmix64(parent_seed ^ splitmix64(index + 0x9E3779B97F4A7C15))
//! ```
//!
//! where `splitmix64` is the finalizer of Steele, Lea and Flood's SplitMix64
//! generator. Replication `r` of an experiment with base seed `b` therefore
//! uses `RandomStream::new(b).derive(r)` regardless of which thread runs it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child of a stream seeded with `parent`.
pub fn mix_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index.wrapping_add(GOLDEN_GAMMA)))
}

/// A single-owner deterministic generator that remembers its seed.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream; depends only on this stream's seed and `index`.
    pub fn derive(&self, index: u64) -> RandomStream {
        RandomStream::new(mix_seed(self.seed, index))
    }

    /// Child stream addressed by a path of indices.
    pub fn derive_path(&self, path: &[u64]) -> RandomStream {
        RandomStream::new(path.iter().fold(self.seed, |seed, &i| mix_seed(seed, i)))
    }

    /// Uniform integer in `0..bound`. `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.random_range(0..bound)
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Pick an index with probability proportional to integer `weights`.
    /// Returns `None` when all weights are zero.
    pub fn weighted_index(&mut self, weights: &[u64]) -> Option<usize> {
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return None;
        }
        let mut u = self.below(total);
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                return Some(i);
            }
            u -= w;
        }
        unreachable!("draw below total weight always lands in a cell")
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
