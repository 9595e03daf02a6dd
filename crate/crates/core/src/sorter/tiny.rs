use crate::key::BucketKey;

use super::dispatch::TINY_KEYS;

/// Counting sort against at most eight known keys.
///
/// Every element is compared with all eight lanes and each equality is
/// added to its counter, so the loop has no data-dependent branch. If the
/// counters do not account for every element (a key outside `keys`), the
/// input is left untouched and `false` is returned.
pub fn tiny_count_sort<K: BucketKey>(data: &mut [K], keys: &[K]) -> bool {
    assert!(
        !keys.is_empty() && keys.len() <= TINY_KEYS,
        "tiny count takes 1..=8 keys, got {}",
        keys.len()
    );
    let used = keys.len();
    let mut sorted = [keys[0]; TINY_KEYS];
    sorted[..used].copy_from_slice(keys);
    sorted[..used].sort_unstable();
    debug_assert!(sorted[..used].windows(2).all(|w| w[0] < w[1]), "keys must be distinct");

    // unused lanes repeat keys[0]; their counters are ignored
    let mut counts = [0u64; TINY_KEYS];
    for &v in data.iter() {
        for j in 0..TINY_KEYS {
            counts[j] += u64::from(v == sorted[j]);
        }
    }
    if counts[..used].iter().sum::<u64>() != data.len() as u64 {
        return false;
    }
    let mut pos = 0;
    for j in 0..used {
        let c = counts[j] as usize;
        data[pos..pos + c].fill(sorted[j]);
        pos += c;
    }
    true
}
