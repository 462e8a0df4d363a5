//! Seed-stream derivation.
//!
//! Every random decision in the crate is drawn from a ChaCha stream keyed by
//! the user seed plus a label path, so results never depend on scheduling or
//! on how many other draws happened elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable key for a seed and a path of labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey(splitmix64(seed))
    }

    pub fn child(self, label: &str) -> Self {
        let mut h = FNV_OFFSET;
        for b in label.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(FNV_PRIME);
        }
        StreamKey(splitmix64(self.0 ^ h))
    }

    pub fn index(self, i: u64) -> Self {
        StreamKey(splitmix64(self.0.wrapping_add(splitmix64(i ^ 0x5851_f42d_4c95_7f2d))))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Plain seeded generator for single-model fits.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
