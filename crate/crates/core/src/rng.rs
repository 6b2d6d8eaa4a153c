//! Seed derivation for per-drop random substreams.
//!
//! All randomness flows from one 64-bit master seed. Each consumer
//! (terminal positions, macro links, relay links, coverage samples) gets
//! its own ChaCha8 stream keyed by `(seed, index, tag)`, so results do not
//! depend on evaluation order or on how drops are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tag separating independent streams of one drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    TerminalPositions = 1,
    MacroLinks = 2,
    RelayLinks = 3,
    CoverageSamples = 4,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `(seed, index, tag)` into a single 64-bit stream key.
pub fn stream_key(seed: u64, index: u64, tag: StreamTag) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (tag as u64))
}

pub fn substream(seed: u64, index: u64, tag: StreamTag) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, index, tag))
}
