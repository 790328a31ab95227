//! Deterministic, counter-based random streams.
//!
//! Every Monte Carlo draw in this crate flows from a [`Stream`] derived from a
//! master seed plus a counter (sample index, grid cell index, chunk index, ...).
//! Because the derivation depends only on those integers and never on execution
//! order, results are bit-identical no matter how work is sharded across
//! threads or processes.

/// SplitMix64 finalizer. Full-avalanche mix of a 64-bit value.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derives a child seed from a parent seed and a branch label.
///
/// Used to give independent substreams to sweep cells, documents, chunks and
/// the like without threading any mutable generator state between them.
#[inline]
pub fn derive(seed: u64, branch: u64) -> u64 {
    mix(mix(seed) ^ branch.wrapping_mul(GOLDEN).wrapping_add(0xA24B_AED4_963E_E407))
}

/// A small, fast generator over the SplitMix64 sequence.
///
/// `Stream::for_sample(seed, i)` opens the substream owned by counter `i`;
/// distinct counters give statistically independent streams.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream { state: mix(seed) }
    }

    pub fn for_sample(seed: u64, index: u64) -> Self {
        Stream { state: derive(seed, index) }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Unbiased uniform draw in `[0, n)` via rejection.
    #[inline]
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below(0)");
        // Reject draws from the incomplete top cycle so every residue is
        // equally likely.
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }
}
