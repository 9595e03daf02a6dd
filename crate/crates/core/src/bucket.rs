//! Cache-line buckets and the bucket table used by the counting pass.

use crate::hashing::{fast_hash_seeded, GOLDEN_GAMMA};
use crate::key::BucketKey;

/// One cache line of `(key, counter)` slots.
///
/// A slot is occupied iff its counter is nonzero. Keys start zeroed, so an
/// update with key 0 may match an empty slot; it then claims that slot,
/// which is the same outcome as an explicit claim.
#[repr(C, align(64))]
#[derive(Clone, Copy, Debug, Default)]
pub struct Bucket<K: BucketKey> {
    keys: K::Lanes,
    counts: K::Counts,
}

impl<K: BucketKey> Bucket<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn keys(&self) -> &[K] {
        self.keys.as_ref()
    }

    pub fn counts(&self) -> &[u32] {
        self.counts.as_ref()
    }

    /// Number of occupied slots.
    pub fn len(&self) -> usize {
        self.counts().iter().filter(|&&c| c > 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.counts().iter().all(|&c| c == 0)
    }

    pub fn is_full(&self) -> bool {
        self.counts().iter().all(|&c| c > 0)
    }

    /// Occupied slots as `(key, count)`.
    pub fn occupied(&self) -> impl Iterator<Item = (K, u32)> + '_ {
        self.keys()
            .iter()
            .zip(self.counts())
            .filter(|(_, &c)| c > 0)
            .map(|(&k, &c)| (k, c))
    }

    /// Adds `inc` occurrences of `val`. Returns false, leaving the bucket
    /// untouched, when `val` is absent and every slot is taken.
    #[inline]
    pub fn update(&mut self, val: K, inc: u32) -> bool {
        self.update_kernel::<false>(val, inc) != Outcome::Full
    }

    /// `SIMD = true` uses the AVX2 lane compare and must only be
    /// instantiated inside code that has verified AVX2 support.
    #[inline(always)]
    pub(crate) fn update_kernel<const SIMD: bool>(&mut self, val: K, inc: u32) -> Outcome {
        debug_assert!(inc >= 1);
        let m = Self::match_mask::<SIMD>(&self.keys, val);
        if m != 0 {
            let j = m.trailing_zeros() as usize;
            let c = &mut self.counts.as_mut()[j];
            // A zero counter here means key 0 landed on a pristine slot.
            let claimed = *c == 0;
            *c += inc;
            return if claimed { Outcome::Claim } else { Outcome::Hit };
        }
        let counts = self.counts.as_mut();
        if let Some(j) = counts.iter().position(|&c| c == 0) {
            self.keys.as_mut()[j] = val;
            counts[j] = inc;
            return Outcome::Claim;
        }
        Outcome::Full
    }

    #[inline(always)]
    fn match_mask<const SIMD: bool>(lanes: &K::Lanes, val: K) -> u32 {
        #[cfg(target_arch = "x86_64")]
        if SIMD {
            // SAFETY: guaranteed by the caller of `update_kernel::<true>`.
            return unsafe { K::eq_mask_avx2(lanes, val) };
        }
        K::eq_mask(lanes, val)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Hit,
    Claim,
    Full,
}

/// Counters kept by [`BucketTable`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TableStats {
    pub updates: u64,
    pub hits: u64,
    pub claims: u64,
    /// Updates that found their bucket full.
    pub spill_pushes: u64,
}

/// `M = 2^m_log2` buckets plus a spill buffer of raw keys.
#[derive(Clone, Debug)]
pub struct BucketTable<K: BucketKey> {
    buckets: Vec<Bucket<K>>,
    m_log2: u32,
    multiplier: u64,
    spill: Vec<K>,
    stats: TableStats,
}

impl<K: BucketKey> BucketTable<K> {
    /// A zeroed table of `m` buckets. `m` must be a power of two, at least 8.
    pub fn new(m: usize) -> Self {
        Self::with_multiplier(m, GOLDEN_GAMMA)
    }

    /// Like [`BucketTable::new`] with a custom odd hash multiplier.
    pub fn with_multiplier(m: usize, multiplier: u64) -> Self {
        assert!(m.is_power_of_two() && m >= 8, "bucket count must be a power of two >= 8, got {m}");
        assert!(multiplier & 1 == 1, "hash multiplier must be odd");
        Self {
            buckets: vec![Bucket::default(); m],
            m_log2: m.trailing_zeros(),
            multiplier,
            spill: Vec::new(),
            stats: TableStats::default(),
        }
    }

    /// Table sized by [`table_size_for`] for an estimated cardinality.
    pub fn sized_for(k_hat: f64, n: usize) -> Self {
        Self::new(table_size_for(k_hat, n, K::CAP))
    }

    pub fn len_buckets(&self) -> usize {
        self.buckets.len()
    }

    pub fn m_log2(&self) -> u32 {
        self.m_log2
    }

    pub fn buckets(&self) -> &[Bucket<K>] {
        &self.buckets
    }

    pub fn spill(&self) -> &[K] {
        &self.spill
    }

    pub fn stats(&self) -> TableStats {
        let s = self.stats;
        TableStats { hits: s.updates - s.claims - s.spill_pushes, ..s }
    }

    #[inline(always)]
    pub fn bucket_index(&self, val: K) -> usize {
        fast_hash_seeded(val.widen(), self.m_log2, self.multiplier)
    }

    /// Counts `inc` copies of `val`; a full bucket sends `inc` copies of the
    /// raw key to the spill.
    #[inline]
    pub fn update(&mut self, val: K, inc: u32) {
        self.update_kernel::<false>(val, inc);
        self.stats.updates += 1;
    }

    #[inline(always)]
    fn update_kernel<const SIMD: bool>(&mut self, val: K, inc: u32) {
        let idx = self.bucket_index(val);
        // SAFETY: fast_hash output is < 2^m_log2 == buckets.len().
        let bucket = unsafe { self.buckets.get_unchecked_mut(idx) };
        match bucket.update_kernel::<SIMD>(val, inc) {
            Outcome::Hit => {}
            Outcome::Claim => self.stats.claims += 1,
            Outcome::Full => {
                self.stats.spill_pushes += 1;
                self.spill.extend(std::iter::repeat_n(val, inc as usize));
            }
        }
    }

    /// Counts every maximal run of equal neighbours in `x` as one update.
    ///
    /// Same effect as calling [`BucketTable::update`] per run, with the
    /// table geometry held in locals for the duration of the loop.
    #[inline(always)]
    pub(crate) fn count_runs<const SIMD: bool>(&mut self, x: &[K]) {
        let Self { buckets, m_log2, multiplier, spill, stats } = self;
        let (m_log2, multiplier) = (*m_log2, *multiplier);
        let buckets = buckets.as_mut_slice();
        let (mut updates, mut claims, mut spills) = (0u64, 0u64, 0u64);
        let mut rest = x;
        while let Some((&v, tail)) = rest.split_first() {
            let run = 1 + tail.iter().take_while(|&&y| y == v).count();
            let idx = fast_hash_seeded(v.widen(), m_log2, multiplier);
            // SAFETY: fast_hash output is < 2^m_log2 == buckets.len().
            let bucket = unsafe { buckets.get_unchecked_mut(idx) };
            match bucket.update_kernel::<SIMD>(v, run as u32) {
                Outcome::Hit => {}
                Outcome::Claim => claims += 1,
                Outcome::Full => {
                    spills += 1;
                    spill.extend(std::iter::repeat_n(v, run));
                }
            }
            updates += 1;
            rest = &rest[run..];
        }
        stats.updates += updates;
        stats.claims += claims;
        stats.spill_pushes += spills;
    }

    /// All occupied slots as `(key, count)`, bucket by bucket.
    pub fn occupied(&self) -> impl Iterator<Item = (K, u32)> + '_ {
        self.buckets.iter().flat_map(Bucket::occupied)
    }

    /// Sum of all bucket counters plus the spill length.
    pub fn counted_total(&self) -> u64 {
        self.occupied().map(|(_, c)| u64::from(c)).sum::<u64>() + self.spill.len() as u64
    }

    /// True when no spilled key also sits in an occupied slot.
    pub fn spill_disjoint(&self) -> bool {
        self.spill.iter().all(|&v| {
            let b = &self.buckets[self.bucket_index(v)];
            b.occupied().all(|(k, _)| k != v)
        })
    }

    pub(crate) fn take_spill(&mut self) -> Vec<K> {
        std::mem::take(&mut self.spill)
    }
}

/// Bucket count for an estimated cardinality: `bit_ceil(8 · k_hat / cap)`,
/// clamped to `[8, bit_ceil(n / cap)]`. The lower bound wins when the
/// interval is empty.
///
/// The target is a per-slot load of 1/8, i.e. half a key per 64-bit bucket.
pub fn table_size_for(k_hat: f64, n: usize, cap: usize) -> usize {
    debug_assert!(cap > 0);
    let want = (8.0 * k_hat.max(1.0) / cap as f64).ceil();
    // saturate absurd estimates instead of overflowing the shift
    let want = if want >= (1u64 << 62) as f64 { 1usize << 62 } else { want as usize };
    let upper = n.div_ceil(cap).max(1).next_power_of_two();
    want.next_power_of_two().min(upper).max(8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::fast_hash;

    #[test]
    fn layout_is_one_cache_line() {
        assert_eq!(std::mem::size_of::<Bucket<u64>>(), 64);
        assert_eq!(std::mem::align_of::<Bucket<u64>>(), 64);
        assert_eq!(std::mem::size_of::<Bucket<u32>>(), 64);
        assert_eq!(std::mem::align_of::<Bucket<u32>>(), 64);
        let t = BucketTable::<u64>::new(16);
        for b in t.buckets() {
            assert_eq!(b as *const _ as usize % 64, 0);
        }
    }

    #[test]
    fn claim_then_hit() {
        let mut b = Bucket::<u64>::new();
        assert!(b.update(42, 1));
        assert_eq!((b.keys()[0], b.counts()[0]), (42, 1));
        assert!(b.update(42, 3));
        assert_eq!((b.keys()[0], b.counts()[0]), (42, 4));
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn full_bucket_rejects_and_is_unchanged() {
        let mut b = Bucket::<u64>::new();
        for k in 1..=4 {
            assert!(b.update(k, 1));
        }
        let before = b;
        assert!(!b.update(5, 1));
        assert_eq!(b.keys(), before.keys());
        assert_eq!(b.counts(), before.counts());
        // existing keys still hit
        assert!(b.update(3, 2));
        assert_eq!(b.counts()[2], 3);
    }

    #[test]
    fn zero_key_claims_zero_slot() {
        let mut b = Bucket::<u64>::new();
        assert!(b.update(0, 2));
        assert_eq!((b.keys()[0], b.counts()[0]), (0, 2));
        assert_eq!(b.len(), 1);
        assert!(b.update(7, 1));
        assert!(b.update(0, 1));
        assert_eq!(b.counts(), &[3, 1, 0, 0]);
    }

    #[test]
    fn zero_key_after_nonzero_keys() {
        let mut b = Bucket::<u64>::new();
        b.update(5, 1);
        // key 0 matches pristine slot 1, the lowest empty slot
        assert!(b.update(0, 1));
        assert_eq!(b.keys()[..2], [5, 0]);
        assert_eq!(b.counts()[..2], [1, 1]);
        assert!(b.update(9, 1));
        assert_eq!(b.keys()[2], 9);
    }

    #[test]
    fn narrow_keys_have_eight_slots() {
        let mut b = Bucket::<u32>::new();
        for k in 10..18 {
            assert!(b.update(k, 1));
        }
        assert!(b.is_full());
        assert!(!b.update(99, 1));
    }

    #[test]
    fn sizing_fixtures() {
        assert_eq!(table_size_for(200.0, 10_000_000, 4), 512);
        assert_eq!(table_size_for(4000.0, 10_000_000, 4), 8192);
        assert_eq!(table_size_for(10_000.0, 10_000_000, 4), 32768);
        assert_eq!(table_size_for(1.0, 10_000_000, 4), 8);
        assert_eq!(table_size_for(1e6, 1024, 4), 256);
        // inverted interval: lower clamp wins
        assert_eq!(table_size_for(1e6, 3, 4), 8);
        assert_eq!(table_size_for(200.0, 10_000_000, 8), 256);
    }

    #[test]
    fn repeated_key_accumulates() {
        let mut t = BucketTable::<u64>::new(8);
        t.update(7, 1);
        t.update(7, 1);
        let b = &t.buckets()[fast_hash(7, 3)];
        assert_eq!(b.occupied().collect::<Vec<_>>(), vec![(7, 2)]);
        assert!(t.spill().is_empty());
    }

    fn colliding_keys(count: usize, m_log2: u32) -> Vec<u64> {
        let target = fast_hash(1, m_log2);
        (1..).filter(|&x| fast_hash(x, m_log2) == target).take(count).collect()
    }

    #[test]
    fn fifth_colliding_key_spills() {
        let keys = colliding_keys(5, 3);
        let mut t = BucketTable::<u64>::new(8);
        for &k in &keys {
            t.update(k, 1);
        }
        assert_eq!(t.spill(), &[keys[4]]);
        assert_eq!(t.buckets()[fast_hash(keys[0], 3)].len(), 4);
        assert_eq!(t.stats().spill_pushes, 1);
        assert!(t.spill_disjoint());
    }

    #[test]
    fn run_spill_replicates() {
        let keys = colliding_keys(5, 3);
        let mut t = BucketTable::<u64>::new(8);
        for &k in &keys[..4] {
            t.update(k, 1);
        }
        t.update(keys[4], 3);
        assert_eq!(t.spill(), &[keys[4]; 3]);
        assert_eq!(t.counted_total(), 7);
    }

    #[test]
    #[should_panic]
    fn rejects_tiny_table() {
        BucketTable::<u64>::new(4);
    }
}
