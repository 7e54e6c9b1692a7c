//! Addressable random streams.
//!
//! Every random draw comes from a ChaCha8 stream selected by
//! `(seed, tag, index)`: the seed picks the key, the tag and index pick the
//! 64-bit stream id. Draws therefore do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::prob::FiniteDistribution;

/// Stream families. Codebook layer `j` of a `k`-layer book uses tag `k - j`,
/// so the base layer is always tag 1.
pub(crate) const TAG_SIMULATION: u64 = 0x40;
pub(crate) const TAG_RELAY_FIRST: u64 = 0x50;
pub(crate) const TAG_RELAY_SECOND: u64 = 0x51;
pub(crate) const TAG_PERMUTATION: u64 = 0x60;

pub(crate) fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    debug_assert!(tag < 1 << 8 && index < 1 << 56);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 56) | index);
    rng
}

pub(crate) fn draw(rng: &mut ChaCha8Rng, dist: &FiniteDistribution) -> usize {
    dist.sample_with(rng.random::<f64>())
}
