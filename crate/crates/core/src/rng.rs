//! Counter-addressable random streams.
//!
//! A [`RandomStream`] is ChaCha8 keyed by `seed_from_u64(master_seed)` with its
//! 64-bit stream selector set to a stream index. Distinct indices give
//! independent, non-overlapping sequences, so a work item can rebuild its
//! stream from `(master_seed, index)` alone and results do not depend on
//! which thread ran it or in which order.
//!
//! Multi-component addresses (experiment tag, scale, replicate, ...) are folded
//! into one index by [`stream_index`], a chained SplitMix64 finalizer. Both the
//! generator and the mixing function are fixed for this crate version.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        Self { rng }
    }

    /// Stream addressed by a tuple of components, see [`stream_index`].
    pub fn derive(master_seed: u64, components: &[u64]) -> Self {
        Self::new(master_seed, stream_index(components))
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

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds address components into a single stream index:
/// `h₀ = len`, `hₖ₊₁ = splitmix64(hₖ ⊕ cₖ)`.
pub fn stream_index(components: &[u64]) -> u64 {
    components
        .iter()
        .fold(splitmix64(components.len() as u64), |h, &c| {
            splitmix64(h ^ c)
        })
}
