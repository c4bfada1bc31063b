//! Reproducible random streams.
//!
//! Every random draw in the crate flows from a [`SeededRng`]. A stream is
//! identified by a 64-bit key; child streams are derived from the parent key
//! and a task index, so work handed to a thread pool draws the same numbers no
//! matter which worker runs it or in which order tasks complete.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator type handed to simulators and samplers.
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededRng {
    key: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { key: splitmix64(seed) }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Child stream for task `index`.
    pub fn split(&self, index: u64) -> Self {
        let mixed = splitmix64(self.key ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)));
        Self { key: mixed }
    }

    /// Child stream addressed by a label and an index, e.g. `("pmc-iter", t)`.
    pub fn split_named(&self, label: &str, index: u64) -> Self {
        let tag = label
            .bytes()
            .fold(0xCBF2_9CE4_8422_2325_u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01B3));
        self.split(tag).split(index)
    }

    /// Materialize the generator for this stream.
    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}
