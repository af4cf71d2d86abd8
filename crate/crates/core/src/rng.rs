//! Seed derivation and the fixed random generator.
//!
//! All randomness in the crate flows from a single 64-bit seed through
//! [`Generator`], a ChaCha8 stream cipher used as a counter-based generator.
//! Independent substreams are addressed by a `(seed, stream)` pair so that
//! parallel work produces the same bytes regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate.
pub type Generator = ChaCha8Rng;

/// Generator for the given seed on stream 0.
pub fn generator(seed: u64) -> Generator {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for substream `stream` of `seed`.
///
/// Streams of the same seed never overlap, and distinct seeds are expanded
/// into unrelated keys, so `(seed, stream)` pairs index disjoint sequences.
pub fn stream(seed: u64, stream: u64) -> Generator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer. Used to turn structured inputs into well-spread seeds.
pub fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Child seed for index `index` under `base`.
///
/// Distinct `(base, index)` pairs give distinct seeds with overwhelming
/// probability, unlike a plain XOR where `(b, i)` and `(b ^ i, 0)` collide.
pub fn derive(base: u64, index: u64) -> u64 {
    mix(mix(base) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Seed derived from the bit patterns of a point. Used for self-checks that
/// must be deterministic functions of their input.
pub fn seed_from_coords(coords: &[f64]) -> u64 {
    coords
        .iter()
        .fold(0x5851_F42D_4C95_7F2D, |acc, c| mix(acc ^ c.to_bits()))
}
