//! The adaptive sort pipeline.
//!
//! ```text
//! monotone? ── yes ──> done
//!    │
//! n < 2048? ── yes ──> comparison sort
//!    │
//! sample 1024 strided keys, estimate K̂
//!    │
//! K̂ ≤ 8 and u ≤ 8 ──> tiny count ── miss ──┐
//!    │                                      │
//! 2·K̂ > n ──> comparison sort               │
//!    │                                      │
//! count runs into buckets <─────────────────┘
//!    │
//! spill > n/2 ──> comparison sort
//!    │
//! merge buckets + folded spill, sort pairs, emit
//! ```

mod count;
mod dispatch;
mod reconstruct;
mod telemetry;
mod tiny;

use std::time::Instant;

pub use count::{main_count_loop, main_count_loop_with};
pub use dispatch::{dispatch, is_monotone, DispatchDecision, MAX_COUNTED_LEN, SMALL_N, TINY_KEYS};
pub use reconstruct::{
    emit, fold_runs, merge_pairs, pair_sort, reconstruct, Pair, PairList, PAIR_RADIX_THRESHOLD,
};
pub use telemetry::{Route, SortTelemetry, StageTimings};
pub use tiny::tiny_count_sort;

use crate::hashing::GOLDEN_GAMMA;
use crate::key::{from_ordered_slice, to_ordered_slice, BucketKey, SortKey};

/// The comparison sort used by every fallback route.
///
/// This is the standard library's unstable sort; swapping in another engine
/// only requires changing this function.
#[inline]
pub fn fallback_sort<K: Ord>(data: &mut [K]) {
    data.sort_unstable();
}

/// Tunables for [`cafs_sort_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SortConfig {
    /// Odd multiplier for the bucket hash.
    pub hash_multiplier: u64,
    /// Use the AVX2 lane compare when the CPU has it.
    pub allow_simd: bool,
}

impl Default for SortConfig {
    fn default() -> Self {
        Self { hash_multiplier: GOLDEN_GAMMA, allow_simd: true }
    }
}

/// Sorts `data` ascending in place and reports the route taken.
///
/// ```
/// let mut v = vec![3u64, 1, 2, 1];
/// let t = cafs::cafs_sort(&mut v);
/// assert_eq!(v, [1, 1, 2, 3]);
/// assert_eq!(t.route, cafs::Route::FallbackSmallN);
/// ```
pub fn cafs_sort<T: SortKey>(data: &mut [T]) -> SortTelemetry {
    cafs_sort_with(data, &SortConfig::default())
}

pub fn cafs_sort_with<T: SortKey>(data: &mut [T], config: &SortConfig) -> SortTelemetry {
    let words = to_ordered_slice(data);
    let telemetry = sort_unsigned(words, config);
    from_ordered_slice::<T>(words);
    telemetry
}

fn sort_unsigned<K: BucketKey>(data: &mut [K], config: &SortConfig) -> SortTelemetry {
    let n = data.len();
    let mut tel = SortTelemetry { output_len: n, ..Default::default() };

    let t = Instant::now();
    let decision = dispatch(data);
    tel.timings.sample = t.elapsed();
    tel.route = decision.route();
    tel.estimate = decision.estimate().copied();

    let k_hat = match decision {
        DispatchDecision::AlreadySorted => return tel,
        DispatchDecision::FallbackSmallN | DispatchDecision::FallbackHighEntropy { .. } => {
            let t = Instant::now();
            fallback_sort(data);
            tel.timings.fallback = t.elapsed();
            return tel;
        }
        DispatchDecision::TinyCount { keys, estimate } => {
            let t = Instant::now();
            let done = tiny_count_sort(data, &keys);
            tel.timings.count = t.elapsed();
            if done {
                return tel;
            }
            tel.tiny_count_fell_through = true;
            tel.route = Route::Main;
            estimate.k_hat
        }
        DispatchDecision::Main { estimate } => estimate.k_hat,
    };

    let t = Instant::now();
    let table = main_count_loop_with(data, k_hat, config.hash_multiplier, config.allow_simd);
    tel.timings.count += t.elapsed();
    reconstruct(table, data, &mut tel);
    tel
}
