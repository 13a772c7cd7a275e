//! Seeded, labelled random streams.
//!
//! Generator `chacha20-sha256-v1`:
//!
//! 1. key = SHA-256(`"interview-sim/rng/v1\0"` ‖ seed as 8 little-endian bytes ‖ label UTF-8)
//! 2. keystream = ChaCha20 (20 rounds) with that key, nonce 0, block counter from 0
//! 3. `next_u64` = next 8 keystream bytes read little-endian
//! 4. `uniform()` = `(next_u64 >> 11) * 2^-53`, in `[0, 1)`
//!
//! Any ChaCha20 implementation reproduces the stream byte-for-byte, so the
//! sequences are stable across platforms and languages. Streams with different
//! labels use unrelated keys.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

pub const RNG_VERSION: &str = "chacha20-sha256-v1";

const KEY_DOMAIN: &[u8] = b"interview-sim/rng/v1\0";

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha20Rng,
}

impl SimRng {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(KEY_DOMAIN);
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        SimRng {
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    /// Recreates a stream that has already produced `position` 32-bit words.
    pub fn at_position(seed: u64, label: &str, position: u64) -> Self {
        let mut rng = SimRng::new(seed, label);
        rng.inner.set_word_pos(u128::from(position));
        rng
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u64 {
        self.inner.get_word_pos() as u64
    }

    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// First `u64` of the `(seed, label)` stream; used to derive child seeds.
    pub fn derive_seed(seed: u64, label: &str) -> u64 {
        SimRng::new(seed, label).next_u64()
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
