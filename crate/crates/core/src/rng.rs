//! Seedable, splittable random generator used by every stochastic operation.
//!
//! The generator is SplitMix64. Independent streams are derived statelessly
//! from `(seed, label)`, so a trial's stream depends only on its index and
//! never on scheduling order. That is what makes parallel Monte Carlo runs
//! reproduce the sequential results bit for bit.

/// SplitMix64 state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Derives an independent stream from this generator's seed and a label.
    /// Does not advance `self`.
    pub fn split(&self, label: u64) -> Self {
        SplitMix64 {
            state: mix(self.state ^ mix(label.wrapping_add(GAMMA))),
        }
    }

    /// Two-label split, for (grid index, trial) style derivations.
    pub fn split2(&self, a: u64, b: u64) -> Self {
        self.split(a).split(b)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform in [0, 1), 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). `n` must be positive.
    pub fn next_below(&mut self, n: u64) -> u64 {
        // Rejection-free: bias is negligible for desk-scale n but we keep
        // the widening-multiply trick anyway.
        let x = self.next_u64();
        ((x as u128 * n as u128) >> 64) as u64
    }
}

/// Stateless uniform hash of (seed, key) used for random binning.
pub fn hash_bin(seed: u64, key: u64) -> u64 {
    mix(seed ^ mix(key.wrapping_add(GAMMA)))
}
