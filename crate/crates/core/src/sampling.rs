//! Seed derivation for the seeded samplers.
//!
//! Every sampled quantity draws from its own ChaCha stream keyed by the user
//! seed plus a stream tag (layer, word hash, ...), so results never depend on
//! evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const STREAM_OCCURRENCES: u64 = 0x6f63_6375;
pub(crate) const STREAM_COSINE_BASELINE: u64 = 0x636f_7362;
pub(crate) const STREAM_MEV_BASELINE: u64 = 0x6d65_7662;
pub(crate) const STREAM_WORD_SAMPLE: u64 = 0x776f_7264;
pub(crate) const STREAM_SENTENCE_SAMPLE: u64 = 0x7365_6e74;
pub(crate) const STREAM_KMEANS: u64 = 0x6b6d_6e73;
pub(crate) const STREAM_SYNTH: u64 = 0x7379_6e74;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(seed: u64, stream: &[u64]) -> u64 {
    stream
        .iter()
        .fold(splitmix64(seed), |acc, &part| splitmix64(acc ^ splitmix64(part)))
}

pub(crate) fn rng_for(seed: u64, stream: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}

/// FNV-1a, used to key per-word streams independently of index layout.
pub(crate) fn word_key(word: &str) -> u64 {
    word.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Uniform sample of `amount` distinct indices out of `0..len`, returned in
/// ascending order. Returns all indices when `amount >= len`.
pub(crate) fn sorted_subset(rng: &mut ChaCha8Rng, len: usize, amount: usize) -> Vec<usize> {
    if amount >= len {
        return (0..len).collect();
    }
    let mut picked = rand::seq::index::sample(rng, len, amount).into_vec();
    picked.sort_unstable();
    picked
}
