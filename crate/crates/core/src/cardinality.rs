//! Sampled cardinality estimation.
//!
//! Up to [`SAMPLE_SIZE`] strided samples go into a fixed 4096-slot
//! open-addressing table. The frequency spectrum of that table (distinct
//! count `u`, singletons `f1`, doubletons `f2`) feeds a smoothed Chao1
//! estimate `u + f1² / (2 (f2 + 1))`.

use crate::hashing::fast_hash;
use crate::key::BucketKey;

/// Samples drawn per estimate.
pub const SAMPLE_SIZE: usize = 1024;
/// Slots in a [`FreqSet`].
pub const FREQSET_SLOTS: usize = 4096;
const FREQSET_LOG2: u32 = 12;

/// Open-addressing frequency table with linear probing.
///
/// Load never exceeds 1/4 since at most [`SAMPLE_SIZE`] distinct keys are
/// inserted, so probing always finds a slot.
pub struct FreqSet<K: BucketKey> {
    keys: Box<[K]>,
    counts: Box<[u16]>,
    occupied: usize,
}

impl<K: BucketKey> Default for FreqSet<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: BucketKey> FreqSet<K> {
    pub fn new() -> Self {
        Self {
            keys: vec![K::zero(); FREQSET_SLOTS].into_boxed_slice(),
            counts: vec![0u16; FREQSET_SLOTS].into_boxed_slice(),
            occupied: 0,
        }
    }

    /// Increments the counter of `key`, claiming a slot on first sight.
    pub fn insert(&mut self, key: K) {
        assert!(self.occupied <= SAMPLE_SIZE, "FreqSet holds at most {SAMPLE_SIZE} distinct keys");
        let mut i = fast_hash(key.widen(), FREQSET_LOG2);
        loop {
            if self.counts[i] == 0 {
                self.keys[i] = key;
                self.counts[i] = 1;
                self.occupied += 1;
                return;
            }
            if self.keys[i] == key {
                self.counts[i] += 1;
                return;
            }
            i = (i + 1) & (FREQSET_SLOTS - 1);
        }
    }

    /// Number of distinct keys present.
    pub fn occupied(&self) -> usize {
        self.occupied
    }

    /// Occurrence count of `key` (0 if absent).
    pub fn count(&self, key: K) -> u32 {
        let mut i = fast_hash(key.widen(), FREQSET_LOG2);
        loop {
            match self.counts[i] {
                0 => return 0,
                c if self.keys[i] == key => return u32::from(c),
                _ => i = (i + 1) & (FREQSET_SLOTS - 1),
            }
        }
    }

    /// Present keys with their counts, in slot order.
    pub fn entries(&self) -> impl Iterator<Item = (K, u32)> + '_ {
        self.keys
            .iter()
            .zip(self.counts.iter())
            .filter(|(_, &c)| c > 0)
            .map(|(&k, &c)| (k, u32::from(c)))
    }

    /// `(u, f1, f2)` from one scan over the slots.
    pub fn spectrum(&self) -> (usize, usize, usize) {
        let (mut u, mut f1, mut f2) = (0, 0, 0);
        for &c in self.counts.iter() {
            u += usize::from(c > 0);
            f1 += usize::from(c == 1);
            f2 += usize::from(c == 2);
        }
        (u, f1, f2)
    }

    /// Chao1 estimate for a population of `n` elements.
    pub fn estimate(&self, n: usize) -> CardinalityEstimate {
        let (u, f1, f2) = self.spectrum();
        let saturated = u == SAMPLE_SIZE;
        CardinalityEstimate { k_hat: chao1(u, f1, f2, n, saturated), u, f1, f2, saturated }
    }
}

/// Output of one sampling pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CardinalityEstimate {
    pub k_hat: f64,
    /// Distinct values in the sample.
    pub u: usize,
    pub f1: usize,
    pub f2: usize,
    /// The sample was all-distinct; `k_hat` was set to `n`.
    pub saturated: bool,
}

/// Smoothed Chao1: `u + f1² / (2 (f2 + 1))`, or `n` when the sample saturated.
///
/// The squared singleton term (instead of `f1 (f1 − 1)`) is intentional.
/// The result is capped at `n`, and at least `u`.
pub fn chao1(u: usize, f1: usize, f2: usize, n: usize, saturated: bool) -> f64 {
    if saturated {
        return n as f64;
    }
    let f1 = f1 as f64;
    let raw = u as f64 + f1 * f1 / (2.0 * (f2 as f64 + 1.0));
    raw.min(n as f64).max(u as f64)
}

/// Sample stride for an input of length `n`.
pub fn sample_stride(n: usize) -> usize {
    (n / SAMPLE_SIZE).max(1)
}

/// Fills a fresh [`FreqSet`] from `x[0], x[stride], …` for indices below
/// `min(n, SAMPLE_SIZE · stride)`.
pub fn sample<K: BucketKey>(x: &[K]) -> FreqSet<K> {
    let n = x.len();
    let stride = sample_stride(n);
    let end = n.min(SAMPLE_SIZE * stride);
    let mut set = FreqSet::new();
    for &v in x[..end].iter().step_by(stride) {
        set.insert(v);
    }
    set
}

/// Samples `x` and returns the Chao1 estimate of its cardinality.
pub fn sample_and_estimate<K: BucketKey>(x: &[K]) -> CardinalityEstimate {
    sample(x).estimate(x.len())
}
