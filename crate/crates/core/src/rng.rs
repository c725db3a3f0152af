//! Seed derivation. Every random draw in the crate comes from a ChaCha8
//! stream keyed by a 64-bit seed, so any trial or instance can be replayed
//! on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used when splitting one instance seed into substreams.
pub const STREAM_DESIGN: u64 = 1;
pub const STREAM_NOISE: u64 = 2;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `stream` of the generator keyed by `seed`.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based hash of a master seed and a tuple of counters.
///
/// Each component is folded in with one SplitMix64 round, so the result
/// depends only on the values and their order, never on evaluation order.
pub fn derive_seed(master: u64, counters: &[u64]) -> u64 {
    counters
        .iter()
        .fold(mix64(master), |acc, &c| mix64(acc ^ mix64(c.wrapping_add(0x632b_e59b_d9b4_e019))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn derive_seed_is_order_sensitive() {
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
    }

    #[test]
    fn substreams_differ() {
        let a: u64 = substream(5, STREAM_DESIGN).random();
        let b: u64 = substream(5, STREAM_NOISE).random();
        assert_ne!(a, b);
    }
}
