//! Named random streams derived from a single master seed.
//!
//! Every source of randomness in a run (weight init, latent draws, shuffles,
//! mixture choices, ...) pulls from its own ChaCha stream keyed by a label,
//! so changing how one component consumes randomness does not shift the
//! sequences seen by any other component.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the label bytes; stable across platforms and releases.
fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A reproducible generator for the sub-stream `label` of `master_seed`.
pub fn stream(master_seed: u64, label: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(label_hash(label));
    rng
}

/// A derived u64 seed for components that take a seed rather than an rng.
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    label_hash(label) ^ master_seed.rotate_left(17)
}
