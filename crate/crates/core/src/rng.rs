//! Counter-based random streams.
//!
//! A [`Stream`] is a value: a 64-bit key plus a counter. Output `i` is
//! `mix64(key + i * GOLDEN)` (the SplitMix64 sequence started at `key`), so a
//! stream can be cloned, moved across threads and split into independent
//! children without any shared state. Child keys are derived by mixing the
//! parent key with a tag, which is how replicates, scenery sites and noise
//! bins each get their own stream.

use rand::RngCore;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer (Stafford variant 13). Full avalanche on 64 bits.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a key with a tag into a fresh key. Order matters: `derive_key(a, b)`
/// and `derive_key(b, a)` are unrelated.
#[inline]
pub fn derive_key(key: u64, tag: u64) -> u64 {
    mix64(mix64(key ^ 0x5851_f42d_4c95_7f2d).wrapping_add(tag.wrapping_mul(GOLDEN)) ^ (tag >> 32))
}

/// Hash a short ASCII label into a tag for [`derive_key`].
pub fn label_tag(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed),
            counter: 0,
        }
    }

    /// Independent child stream identified by `tag`. Does not advance `self`.
    pub fn split(&self, tag: u64) -> Stream {
        Stream {
            key: derive_key(self.key, tag),
            counter: 0,
        }
    }

    pub fn split_label(&self, label: &str) -> Stream {
        self.split(label_tag(label))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    #[inline]
    pub fn next(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        (self.next() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
