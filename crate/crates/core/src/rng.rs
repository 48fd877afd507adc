//! Deterministic stream derivation.
//!
//! Every run is driven by a single 64-bit seed. Independent streams are
//! derived with [`mix`]: the environment uses stream `0`, player `i`
//! (1-based harness position) uses stream `i`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream type used throughout the simulator.
pub type Stream = ChaCha8Rng;

/// The splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `mix(seed, stream) = splitmix64(seed + splitmix64(stream))` (wrapping).
pub fn mix(seed: u64, stream: u64) -> u64 {
    splitmix64(seed.wrapping_add(splitmix64(stream)))
}

/// Stream number `stream` of run `seed`.
pub fn stream(seed: u64, stream: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(mix(seed, stream))
}
