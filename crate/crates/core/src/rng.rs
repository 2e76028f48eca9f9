//! Reproducible random streams.
//!
//! Every draw comes from ChaCha8 keyed by `(base_seed, domain)` on the ChaCha
//! stream `stream`. Samplers consume exactly one 64-bit word per candidate
//! pair in canonical pair order, so the word counter doubles as the pair
//! index and a pair's draw never depends on how other pairs are handled.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Draw domains; separate keys for independent uses of the same seed.
pub mod domain {
    pub const EDGES: u64 = 1;
    pub const CROSSING: u64 = 2;
    pub const INTERNAL: u64 = 3;
    pub const EIGEN_START: u64 = 4;
}

/// `(base_seed, stream)` pair identifying one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Seed {
    pub base: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(base: u64, stream: u64) -> Self {
        Seed { base, stream }
    }

    /// Generator for one draw domain of this seed.
    pub fn rng(&self, domain: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.base.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng
    }

    /// A child seed on a different stream, derived deterministically.
    pub fn child(&self, tag: u64) -> Seed {
        Seed {
            base: self.base,
            stream: mix(self.stream ^ mix(tag.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }
}

/// Uniform in `[0, 1)` with 53 random bits from one 64-bit word.
pub fn unit_uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Random vector with entries uniform in `[-1, 1)`.
pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| 2.0 * unit_uniform(rng) - 1.0).collect()
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Platform-independent hash of a sequence of words.
pub fn stable_hash(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6a09_e667_f3bc_c908u64, |h, &w| mix(h ^ mix(w)))
}
