//! Deterministic low-cardinality inputs.
//!
//! A point `(n, k)` draws `n` values uniformly from a palette of `k`
//! distinct values `a + b·i`, where `a` and the odd step `b` come from a
//! SplitMix64 stream seeded with `seed_base + n + k`.

use crate::error::Error;
use crate::hashing::GOLDEN_GAMMA;

pub const DEFAULT_SEED_BASE: u64 = 42;

/// One SplitMix64 step: advances `state` by the golden gamma and returns
/// `(new_state, finalized output)`.
#[inline]
pub fn mix_next(state: u64) -> (u64, u64) {
    let state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (state, z ^ (z >> 31))
}

/// Stateful wrapper around [`mix_next`].
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let (s, out) = mix_next(self.state);
        self.state = s;
        out
    }

    /// Uniform in `[0, bound)` by multiply-high reduction.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        reduce(self.next_u64(), bound)
    }

    /// Uniform in `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        match (hi - lo).checked_add(1) {
            Some(span) => lo + self.below(span),
            None => self.next_u64(),
        }
    }
}

/// Maps a uniform 64-bit word onto `[0, bound)` as `⌊r · bound / 2^64⌋`.
#[inline]
pub fn reduce(r: u64, bound: u64) -> u64 {
    ((u128::from(r) * u128::from(bound)) >> 64) as u64
}

/// Parameters of one generated input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub k: usize,
    pub seed_base: u64,
}

impl GenSpec {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k, seed_base: DEFAULT_SEED_BASE }
    }

    pub fn with_seed_base(mut self, seed_base: u64) -> Self {
        self.seed_base = seed_base;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.k < 2 || self.k > self.n {
            return Err(Error::InvalidGenSpec { n: self.n, k: self.k });
        }
        Ok(())
    }

    fn seed(&self) -> u64 {
        self.seed_base.wrapping_add(self.n as u64).wrapping_add(self.k as u64)
    }

    /// The palette origin `a` and odd step `b`.
    pub fn palette_params(&self) -> (u64, u64) {
        let mut rng = SplitMix64::new(self.seed());
        let a = rng.next_u64();
        let b = rng.next_u64() | 1;
        (a, b)
    }

    pub fn palette(&self) -> Vec<u64> {
        let (a, b) = self.palette_params();
        (0..self.k as u64).map(|i| a.wrapping_add(b.wrapping_mul(i))).collect()
    }
}

/// Generates the input array for `spec`.
pub fn gen_input(spec: &GenSpec) -> Result<Vec<u64>, Error> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed());
    let a = rng.next_u64();
    let b = rng.next_u64() | 1;
    let k = spec.k as u64;
    Ok((0..spec.n).map(|_| a.wrapping_add(b.wrapping_mul(rng.below(k)))).collect())
}
