//! Counter-based random streams.
//!
//! Every uniform draw is a pure function of `(seed, domain, row, round,
//! variable)`: ChaCha8 is keyed by `(seed, domain)`, the 64-bit stream id is the
//! row index and the word position encodes `(round, variable)`. Rows can
//! therefore be processed in any order, on any thread, or one at a time, and
//! still see identical randomness.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Separates independent uses of one user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    PartialRejection = 0x6e65_6c73,
    Gibbs = 0x6769_6262,
    Derive = 0x6465_7276,
    Generator = 0x6765_6e72,
    TrainData = 0x7472_6e64,
}

fn keyed(seed: u64, domain: Domain) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

#[derive(Clone)]
pub struct CounterRng {
    base: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64, domain: Domain) -> Self {
        Self {
            base: keyed(seed, domain),
        }
    }

    /// Uniform draws on `[0, 1)` for variables `0..width` of `row` at `round`.
    pub fn round(&self, row: u64, round: u64, width: usize) -> RoundDraws {
        let mut rng = self.base.clone();
        rng.set_stream(row);
        // two 32-bit words per f64 draw
        rng.set_word_pos(u128::from(round) * width as u128 * 2);
        RoundDraws { rng, left: width }
    }
}

/// The per-variable uniforms of one `(row, round)`, in variable order.
pub struct RoundDraws {
    rng: ChaCha8Rng,
    left: usize,
}

impl Iterator for RoundDraws {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        Some(self.rng.random::<f64>())
    }
}

/// Derives an independent 64-bit seed from `seed` and two counters.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut rng = keyed(seed, Domain::Derive);
    rng.set_stream(a);
    rng.set_word_pos(u128::from(b) * 2);
    rng.next_u64()
}

/// A conventional sequential generator for a given seed and domain.
pub fn sequential(seed: u64, domain: Domain) -> ChaCha8Rng {
    keyed(seed, domain)
}
