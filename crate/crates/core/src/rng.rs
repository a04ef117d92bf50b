//! Reproducible random streams.
//!
//! Every random quantity in the crate flows from a 64-bit master seed
//! through [`derive_stream`], which mixes the seed with a list of stream
//! labels (sweep point index, batch index, ...) and expands the result into
//! a ChaCha key. Streams with different labels are statistically independent
//! and stable across runs, worker counts and platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The splitmix64 mixing step.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent ChaCha stream from a master seed and labels.
pub fn derive_stream(master_seed: u64, labels: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(master_seed);
    for &label in labels {
        state = splitmix64(state ^ splitmix64(label.wrapping_add(0xA5A5_A5A5_A5A5_A5A5)));
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
