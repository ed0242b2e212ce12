use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Seeded generator behind every shuffle.
///
/// The stream is ChaCha with 8 rounds, keyed from the 64-bit seed through
/// `rand_core`'s `seed_from_u64` expansion (PCG32 output filling the 32-byte
/// key). ChaCha output is defined byte-for-byte, so a seed reproduces the same
/// draws on every platform and word size.
///
/// Derived draws, each consuming exactly one 64-bit word unless noted:
/// - [`Prng::unit`]: top 53 bits scaled to `[0, 1)`.
/// - [`Prng::bernoulli`]: `unit() < p`, drawn even for `p` of 0 or 1 so the
///   stream position never depends on `p`.
/// - [`Prng::below`]: Lemire's multiply-high with rejection of the biased
///   low range; may consume more than one word, never biased.
#[derive(Debug, Clone)]
pub struct Prng {
    inner: ChaCha8Rng,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Uniform integer in `[0, n)`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let mut wide = self.next_u64() as u128 * n as u128;
        let mut low = wide as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                wide = self.next_u64() as u128 * n as u128;
                low = wide as u64;
            }
        }
        (wide >> 64) as u64
    }

    pub fn index_below(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// In-place Fisher–Yates (Durstenfeld): for `i` from `len-1` down to 1,
    /// swap `i` with `below(i + 1)`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index_below(i + 1);
            items.swap(i, j);
        }
    }
}
