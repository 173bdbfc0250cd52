//! Seedable, splittable randomness.
//!
//! A [`RandomSource`] is a ChaCha stream keyed by SHA-256 of
//! `(seed, label path)`. Identical seeds and labels give identical
//! streams; distinct labels give unrelated keys. Child streams are derived
//! by label so per-stage and per-worker streams never share state.
//!
//! Stable labels used by the pipelines:
//!
//! | label       | consumer                                   |
//! |-------------|--------------------------------------------|
//! | `cube`      | cube construction (case choice, factors)   |
//! | `sample`    | per-draw bits of cube samplers             |
//! | `booster`   | drawing the booster's fixed factors        |
//! | `pipeline`  | full epsilon-uniform generator             |
//! | `pr`        | product replacement                        |
//! | `run-<i>`   | i-th repetition of an experiment           |

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::error::{contract, Result};

#[derive(Debug, Clone)]
pub struct RandomSource {
    key: [u8; 32],
    label: String,
    rng: ChaCha12Rng,
    bits: u64,
    nbits: u32,
}

impl RandomSource {
    /// Top-level stream for `(seed, label)`.
    pub fn new(seed: u64, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(b"fibcube-seed");
        h.update(seed.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        Self::from_key(h.finalize().into(), label.to_string())
    }

    fn from_key(key: [u8; 32], label: String) -> Self {
        RandomSource { key, label, rng: ChaCha12Rng::from_seed(key), bits: 0, nbits: 0 }
    }

    /// Independent child stream; depends only on this stream's key and the
    /// label, not on how much of this stream has been consumed.
    pub fn derive(&self, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(b"fibcube-child");
        h.update(self.key);
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        Self::from_key(h.finalize().into(), format!("{}/{}", self.label, label))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// One fair bit.
    pub fn fresh_bit(&mut self) -> bool {
        if self.nbits == 0 {
            self.bits = self.rng.next_u64();
            self.nbits = 64;
        }
        let b = self.bits & 1 == 1;
        self.bits >>= 1;
        self.nbits -= 1;
        b
    }

    /// Uniform index in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        // Rejection sampling keeps the result exactly uniform.
        let zone = u64::MAX - (u64::MAX % n) - 1;
        loop {
            let x = self.rng.next_u64();
            if x <= zone {
                return (x % n) as usize;
            }
        }
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Index `i` with probability `weights[i] / Σ weights`.
    pub fn choose_weighted(&mut self, weights: &[f64]) -> Result<usize> {
        if weights.is_empty() {
            return Err(contract("choose_weighted needs at least one weight"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(contract("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(contract("weights must not all be zero"));
        }
        let mut x = self.unit() * total;
        let mut last = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            last = i;
            if x < w {
                return Ok(i);
            }
            x -= w;
        }
        Ok(last)
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
