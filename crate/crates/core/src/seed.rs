//! Deterministic seed fan-out.
//!
//! All randomness in a run flows from one master seed. Streams for distinct
//! purposes are derived by hashing a tag path into the parent state
//! (FNV-1a over the tag bytes, finalized with a splitmix64 round), so adding
//! or removing one consumer never perturbs the draws of another. The same
//! path always yields the same stream on every platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    state: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        SeedTree {
            state: splitmix64(master),
        }
    }

    /// Derive the named child stream.
    pub fn child(&self, tag: &str) -> SeedTree {
        SeedTree {
            state: splitmix64(self.state ^ fnv1a(tag.as_bytes())),
        }
    }

    /// Derive the `i`-th stream under `tag` (folds, repeats, trials, ...).
    pub fn child_idx(&self, tag: &str, i: u64) -> SeedTree {
        SeedTree {
            state: splitmix64(self.state ^ fnv1a(tag.as_bytes()) ^ splitmix64(i ^ 0xa5a5_a5a5)),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut s = self.state;
        for chunk in seed.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
