//! Keyed random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream addressed
//! by `(seed, domain, index)`. The 256-bit key is built from the user seed and a
//! domain tag, and `index` selects one of the 2^64 ChaCha streams of that key.
//! Replicate `r` of an experiment therefore always consumes stream `(seed, r)`
//! no matter which worker thread runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Separates independent uses of one user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Exact thinning simulation of the price path and order flow.
    Path = 0x7061_7468,
    /// Conditional-Poisson binned simulation.
    Binned = 0x6269_6e73,
    /// Regeneration cycles of the fractional-part process.
    Cycle = 0x6379_636c,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
