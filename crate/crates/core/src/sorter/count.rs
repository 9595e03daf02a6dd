use crate::bucket::BucketTable;
use crate::hashing::GOLDEN_GAMMA;
use crate::key::{simd_available, BucketKey};

/// Counts `x` into a table sized for `k_hat`.
///
/// Each maximal run of equal neighbours becomes one update carrying the run
/// length, so grouped input costs one update per group while random input
/// costs one per element.
pub fn main_count_loop<K: BucketKey>(x: &[K], k_hat: f64) -> BucketTable<K> {
    main_count_loop_with(x, k_hat, GOLDEN_GAMMA, true)
}

/// [`main_count_loop`] with an explicit hash multiplier; `allow_simd`
/// false forces the scalar lane compare.
pub fn main_count_loop_with<K: BucketKey>(
    x: &[K],
    k_hat: f64,
    multiplier: u64,
    allow_simd: bool,
) -> BucketTable<K> {
    assert!(x.len() <= u32::MAX as usize, "counting path needs n <= u32::MAX");
    let m = crate::bucket::table_size_for(k_hat, x.len(), K::CAP);
    let mut table = BucketTable::with_multiplier(m, multiplier);
    if allow_simd && simd_available() {
        #[cfg(target_arch = "x86_64")]
        // SAFETY: AVX2 support was just checked.
        unsafe {
            count_runs_avx2(x, &mut table)
        };
    } else {
        table.count_runs::<false>(x);
    }
    table
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
fn count_runs_avx2<K: BucketKey>(x: &[K], table: &mut BucketTable<K>) {
    table.count_runs::<true>(x)
}
