use std::time::Instant;

use crate::bucket::BucketTable;
use crate::key::BucketKey;

use super::telemetry::SortTelemetry;
use super::fallback_sort;

/// Below this many pairs the pair sort uses the comparison sort.
pub const PAIR_RADIX_THRESHOLD: usize = 256;

/// A distinct key and its multiplicity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair<K> {
    pub key: K,
    pub count: u64,
}

impl<K> Pair<K> {
    pub fn new(key: K, count: u64) -> Self {
        Self { key, count }
    }
}

pub type PairList<K> = Vec<Pair<K>>;

/// Sorts distinct-key pairs ascending by key.
///
/// Short lists use the comparison sort. Longer ones use a stable LSD radix
/// sort over 8-bit digits, one pass per key byte, ping-ponging between the
/// list and one scratch buffer. A pass whose digit is constant across all
/// pairs is skipped; it would be the identity.
pub fn pair_sort<K: BucketKey>(pairs: &mut PairList<K>) {
    if pairs.len() < PAIR_RADIX_THRESHOLD {
        pairs.sort_unstable_by_key(|p| p.key);
        return;
    }
    let mut scratch: PairList<K> = vec![Pair::default(); pairs.len()];
    let len = pairs.len();
    for pass in 0..K::BYTES {
        let shift = 8 * pass as u32;
        let digit = |p: &Pair<K>| ((p.key.widen() >> shift) & 0xFF) as usize;

        let mut offsets = [0usize; 256];
        for p in pairs.iter() {
            offsets[digit(p)] += 1;
        }
        if offsets.contains(&len) {
            continue;
        }
        let mut sum = 0;
        for o in offsets.iter_mut() {
            let c = *o;
            *o = sum;
            sum += c;
        }
        for p in pairs.iter() {
            let d = digit(p);
            scratch[offsets[d]] = *p;
            offsets[d] += 1;
        }
        std::mem::swap(pairs, &mut scratch);
    }
}

/// Outputs at least this many bytes are written with non-temporal stores,
/// which skip reading the destination lines into cache first.
const STREAM_BYTES: usize = 16 << 20;

/// Writes each key `count` times, in order, filling `out` exactly.
pub fn emit<K: Copy>(pairs: &[Pair<K>], out: &mut [K]) {
    let total: u64 = pairs.iter().map(|p| p.count).sum();
    assert_eq!(total, out.len() as u64, "pair counts must add up to the output length");
    let stream = std::mem::size_of_val(out) >= STREAM_BYTES;
    let mut pos = 0usize;
    for p in pairs {
        let c = p.count as usize;
        let run = &mut out[pos..pos + c];
        if stream {
            fill_streaming(run, p.key);
        } else {
            run.fill(p.key);
        }
        pos += c;
    }
    #[cfg(target_arch = "x86_64")]
    if stream {
        // SAFETY: sfence has no preconditions; it orders the streaming stores
        // before anything the caller does next.
        unsafe { std::arch::x86_64::_mm_sfence() };
    }
}

#[cfg(target_arch = "x86_64")]
fn fill_streaming<K: Copy>(run: &mut [K], key: K) {
    use std::arch::x86_64::{__m128i, _mm_loadu_si128, _mm_stream_si128};
    let size = std::mem::size_of::<K>();
    if std::mem::size_of_val(run) < 256 || !matches!(size, 4 | 8) {
        run.fill(key);
        return;
    }
    // SAFETY: the slice is split so `body` starts on a 16-byte boundary and
    // is a whole number of 16-byte blocks; `size` divides 16, so the
    // reinterpretation covers exactly the same keys.
    let (head, body, tail) = unsafe { run.align_to_mut::<__m128i>() };
    head.fill(key);
    tail.fill(key);
    let pattern = [key; 4];
    // SAFETY: `pattern` holds at least 16 bytes; SSE2 is baseline on x86_64.
    let v = unsafe { _mm_loadu_si128(pattern.as_ptr().cast()) };
    for block in body {
        // SAFETY: `block` is an aligned, exclusively borrowed 16-byte slot.
        unsafe { _mm_stream_si128(block, v) };
    }
}

#[cfg(not(target_arch = "x86_64"))]
fn fill_streaming<K: Copy>(run: &mut [K], key: K) {
    run.fill(key);
}

/// Appends `(key, run length)` for each run of equal neighbours in a sorted
/// slice.
pub fn fold_runs<K: BucketKey>(sorted: &[K], into: &mut PairList<K>) {
    let mut rest = sorted;
    while let Some((&v, tail)) = rest.split_first() {
        let run = 1 + tail.iter().take_while(|&&y| y == v).count();
        into.push(Pair::new(v, run as u64));
        rest = &rest[run..];
    }
}

/// Merges bucket counters and spill into one ascending pair list.
///
/// Spill and bucket keys are disjoint, so concatenation followed by a sort
/// yields distinct keys.
pub fn merge_pairs<K: BucketKey>(table: &mut BucketTable<K>) -> PairList<K> {
    let mut spill = table.take_spill();
    spill.sort_unstable();
    let mut pairs: PairList<K> = table.occupied().map(|(k, c)| Pair::new(k, u64::from(c))).collect();
    fold_runs(&spill, &mut pairs);
    pair_sort(&mut pairs);
    pairs
}

/// Turns a filled table back into sorted output, written over `data`.
///
/// `data` must still hold the input the table was counted from. When the
/// spill holds more than half the input the count is discarded and `data`
/// is sorted by the comparison fallback instead.
pub fn reconstruct<K: BucketKey>(
    mut table: BucketTable<K>,
    data: &mut [K],
    telemetry: &mut SortTelemetry,
) {
    let n = data.len();
    telemetry.counted_total = table.counted_total();
    telemetry.spill_len = table.spill().len();
    telemetry.table_buckets = table.len_buckets();
    telemetry.table_stats = Some(table.stats());
    debug_assert_eq!(telemetry.counted_total, n as u64);

    if table.spill().len() > n / 2 {
        telemetry.guard_fired = true;
        drop(table);
        let t = Instant::now();
        fallback_sort(data);
        telemetry.timings.fallback = t.elapsed();
        telemetry.output_len = n;
        return;
    }

    let t = Instant::now();
    let pairs = merge_pairs(&mut table);
    telemetry.pairs = pairs.len();
    drop(table);
    telemetry.timings.sort_k = t.elapsed();

    let t = Instant::now();
    emit(&pairs, data);
    telemetry.timings.emit = t.elapsed();
    telemetry.output_len = n;
}
