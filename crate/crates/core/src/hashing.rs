//! Content hashes used for record ids and stage cache keys.

use sha2::{Digest, Sha256};

/// Incremental hasher over length-prefixed parts, so `("ab", "c")` and
/// `("a", "bc")` never collide.
#[derive(Clone, Default)]
pub struct ContentHasher {
    inner: Sha256,
}

impl ContentHasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn part(mut self, bytes: impl AsRef<[u8]>) -> Self {
        let bytes = bytes.as_ref();
        self.inner.update((bytes.len() as u64).to_le_bytes());
        self.inner.update(bytes);
        self
    }

    pub fn hex(self) -> String {
        hex::encode(self.inner.finalize())
    }

    /// First `n` hex characters of the digest.
    pub fn short(self, n: usize) -> String {
        let mut h = self.hex();
        h.truncate(n);
        h
    }
}

pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

/// 64-bit FNV-1a, mixed with a seed. Used for feature hashing where a stable,
/// platform-independent bucket assignment matters more than strength.
pub fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
