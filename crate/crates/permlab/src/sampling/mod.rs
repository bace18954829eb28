//! Seed-reproducible random generation.
//!
//! Every random object in the crate is drawn from an [`RngStream`] derived
//! from a 64-bit [`Seed`] and a stream index. Identical `(seed, index)`
//! pairs produce bit-identical sequences on every platform, which is what
//! makes parallel Monte Carlo runs deterministic: replicate `i` always uses
//! `derive_stream(seed, i)`.

mod haar;
mod matrix;
mod permutation;

pub use haar::{haar_orthogonal, haar_stiefel};
pub use matrix::Matrix;
pub use permutation::{canonical_permutation, cycle_type, uniform_permutation, CycleType, Permutation};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Master seed for a family of random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

/// SplitMix64 finalizer, used as the avalanche mix when deriving stream keys.
///
/// Full 64-bit avalanche: every input bit flips each output bit with
/// probability close to 1/2, so consecutive stream indices yield unrelated
/// generator keys.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// A single-owner random stream.
///
/// Wraps a ChaCha8 generator keyed by an avalanche mix of `(seed, index)`.
/// Gaussian draws use the polar rejection method so the byte stream is
/// identical across platforms and compiler versions.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    spare_gaussian: Option<f64>,
}

/// Derives the random stream for `(seed, index)`.
///
/// The ChaCha key is built from four successive SplitMix64 outputs of the
/// state `seed + (index + 1) * GAMMA`, so distinct indices of one seed give
/// statistically independent streams.
pub fn derive_stream(seed: Seed, index: u64) -> RngStream {
    let mut state = seed
        .0
        .wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1)));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    RngStream {
        rng: ChaCha8Rng::from_seed(key),
        spare_gaussian: None,
    }
}

impl RngStream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from `[0, 1)` with 53 random bits.
    pub fn next_unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform draw from `{0, .., bound-1}` by rejection.
    pub fn uniform_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // Reject the low residue band so every value is equally likely.
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }

    /// Standard normal draw via the Marsaglia polar method.
    pub fn standard_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_unit_f64() - 1.0;
            let v = 2.0 * self.next_unit_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare_gaussian = Some(v * factor);
                return u * factor;
            }
        }
    }
}
