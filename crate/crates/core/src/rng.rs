//! Counter-based random-stream derivation.
//!
//! All randomness in the simulator flows from one master seed. Substreams are
//! derived by mixing the seed with integer tags (experiment, trial, frame,
//! link, ...), never by drawing sequentially from a shared generator, so
//! results are independent of evaluation order and thread count.
//!
//! The derivation is pinned so an alternate implementation can reproduce the
//! trial partitioning:
//!
//! ```text
//! state = splitmix64(master_seed)
//! for tag in tags: state = splitmix64(state ^ tag)
//! stream = ChaCha8 seeded via seed_from_u64(state)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One round of the splitmix64 mixing function.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Fold a tag sequence into a single substream id.
pub fn stream_id(master_seed: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(master_seed);
    for &tag in tags {
        state = splitmix64(state ^ tag);
    }
    state
}

/// Deterministic generator for the substream identified by `tags`.
pub fn stream(master_seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_id(master_seed, tags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_tag_sensitive() {
        let mut a = stream(42, &[1, 2]);
        let mut b = stream(42, &[1, 2]);
        let mut c = stream(42, &[2, 1]);
        let xa: u64 = a.random();
        assert_eq!(xa, b.random::<u64>());
        assert_ne!(xa, c.random::<u64>());
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference splitmix64 stream seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }
}
