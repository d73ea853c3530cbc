//! Stable seed derivation. Values must not change between releases or
//! platforms, so std's hasher is not used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Incrementally mixes labelled components into a 64-bit seed.
#[derive(Debug, Clone, Copy)]
pub struct SeedMixer(u64);

impl SeedMixer {
    pub fn new(base: u64) -> Self {
        SeedMixer(splitmix(base))
    }

    pub fn bytes(mut self, bytes: &[u8]) -> Self {
        let mut h = FNV_OFFSET;
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(FNV_PRIME);
        }
        self.0 = splitmix(self.0 ^ h);
        self
    }

    pub fn str(self, s: &str) -> Self {
        self.bytes(s.as_bytes())
    }

    pub fn int(mut self, v: u64) -> Self {
        self.0 = splitmix(self.0 ^ splitmix(v));
        self
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` for a given seed.
pub fn sub_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SeedMixer::new(seed).int(stream).finish())
}
