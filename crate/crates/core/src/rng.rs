//! Portable seeded randomness.
//!
//! The generator is SplitMix64 (Steele, Lea, Flood 2014), fixed here with
//! its standard constants so that traces are bit-reproducible across
//! platforms and language bindings:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! Doubles in [0, 1) are produced from the top 53 bits: `(u >> 11) * 2^-53`.
//! Derived seeds for parallel trials use `derive_seed(base, i)`, the
//! SplitMix64 output function applied to `base + (i + 1) * GOLDEN`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        finalize(self.state)
    }

    /// Uniform double in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Samples an index from a probability vector by CDF walk.
    /// Weights are assumed to sum to 1; rounding slack falls to the last
    /// positive entry.
    pub fn sample_index(&mut self, probs: &[f64]) -> usize {
        let u = self.next_f64();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                last_positive = i;
            }
            acc += p;
            if u < acc {
                return i;
            }
        }
        last_positive
    }
}

/// Deterministic per-trial seed derivation.
pub fn derive_seed(base: u64, i: u64) -> u64 {
    finalize(base.wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN)))
}
