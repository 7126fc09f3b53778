//! Deterministic pseudo-random numbers.
//!
//! Every stochastic step in the crate (splitting, shuffling, sampling,
//! initialization, dropout) draws from [`XorShift64`], the xorshift64*
//! generator from Marsaglia's xorshift family as refined by Vigna. Using one
//! fixed, fully specified generator instead of a platform RNG is what makes
//! experiments reproducible byte for byte across machines and releases.
//!
//! The state update is exactly:
//!
//! ```text
//! x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27;
//! output = x.wrapping_mul(0x2545_F491_4F6C_DD1D)
//! ```
//!
//! A zero seed would be a fixed point of the update, so it is replaced by the
//! constant `0x9E37_79B9_7F4A_7C15` (documented here so external
//! reimplementations can reproduce the stream).

/// Substitute state used when a caller seeds with zero.
pub const ZERO_SEED_SUBSTITUTE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct XorShift64 {
    state: u64,
}

impl XorShift64 {
    pub fn new(seed: u64) -> Self {
        XorShift64 { state: if seed == 0 { ZERO_SEED_SUBSTITUTE } else { seed } }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform draw from `[0, 1)` using the top 53 bits of the next output.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)` via `next_u64() % n`. The modulo bias is
    /// negligible for the corpus-sized `n` used here and keeps the stream
    /// trivial to reproduce.
    ///
    /// Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0) is undefined");
        (self.next_u64() % n as u64) as usize
    }

    /// Fisher-Yates shuffle, iterating from the last element down and
    /// swapping each position `i` with `below(i + 1)`.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}

/// Derives an independent stream seed from a base seed and a stream tag via
/// one round of SplitMix64 applied to `base ^ splitmix64(tag)`. Used to give
/// shuffling, initialization and dropout their own decorrelated generators
/// while keeping a single user-facing seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
