//! Reproducible random streams.
//!
//! A stream is identified by `(seed, stream_id)`. Both pieces feed a ChaCha8
//! generator: the seed keys it and the stream id selects one of its 2^64
//! independent streams. Child streams are derived by hashing the parent
//! stream id together with an index, so replica `r` of an experiment always
//! draws the same numbers no matter which worker thread runs it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Derives an independent stream for sub-task `index` (a replica, a
    /// site block, a model component).
    pub fn child(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: mix(self.stream_id ^ mix(index.wrapping_add(0x51_7c_c1_b7_27_22_0a_95))),
        }
    }

    /// Starts drawing from the beginning of the stream.
    pub fn rng(&self) -> StreamRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream_id);
        StreamRng { inner }
    }

    /// Starts drawing at the given 32-bit word offset. Drawing `k` `f64`
    /// uniforms consumes `2k` words, so `rng_at(2k)` continues exactly where
    /// a fresh generator would be after `k` uniforms.
    pub fn rng_at(&self, word: u128) -> StreamRng {
        let mut rng = self.rng();
        rng.inner.set_word_pos(word);
        rng
    }
}

// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator bound to one [`RngStream`].
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    /// Uniform on `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Exponential variate of the given positive rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        use rand_distr::{Distribution, Exp};
        // Rates are validated by every caller.
        Exp::new(rate).expect("positive rate").sample(&mut self.inner)
    }

    /// Geometric variate by inverse CDF: `P[j >= m] = q^m`, capped at `cap`
    /// (so `P[cap] = q^cap`). `None` leaves it untruncated.
    #[inline]
    pub fn capped_geometric(&mut self, q: f64, cap: Option<u64>) -> u64 {
        let u = self.uniform();
        capped_geometric_from_uniform(u, q, cap)
    }
}

impl RngCore for StreamRng {
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

/// Inverse CDF of the capped geometric law on one uniform `u` in `[0,1)`.
pub fn capped_geometric_from_uniform(u: f64, q: f64, cap: Option<u64>) -> u64 {
    let cap = cap.unwrap_or(u64::MAX);
    if cap == 0 || q <= 0.0 {
        return 0;
    }
    // P[j >= m] = q^m  <=>  j = floor(ln(1-u) / ln q)
    let x = (1.0 - u).ln() / q.ln();
    if !(x < cap as f64) {
        cap
    } else {
        (x.floor() as u64).min(cap)
    }
}
