//! Cardinality-adaptive hash-count sort for integer keys.
//!
//! When an array of `n` integers holds only `K ≪ n` distinct values, a sort
//! can count each value once and then write the runs back in key order,
//! paying `O(n)` for counting and `O(K log K)` for ordering the keys. This
//! crate implements that pipeline:
//!
//! * a 1024-sample Chao1 estimate of `K` decides between an already-sorted
//!   bypass, a comparison-sort fallback, an eight-counter branch for tiny
//!   key sets, and the main counting path;
//! * the main path counts run-length-folded updates into cache-line buckets
//!   addressed by Fibonacci hashing, spilling keys whose bucket is full;
//! * reconstruction merges buckets and spill into `(key, count)` pairs,
//!   radix-sorts them, and expands them over the input.
//!
//! The [`mod@bench`] and [`analysis`] modules hold the grid benchmark harness and
//! the entropy-bin statistics used to compare the sort against baselines.
//!
//! The bucket machinery is generic over the unsigned key width
//! ([`BucketKey`]: `u32` or `u64`); [`cafs_sort`] additionally accepts
//! `i32` and `i64` through an order-preserving sign flip.

pub mod analysis;
pub mod bench;
pub mod bucket;
pub mod cardinality;
pub mod datagen;
mod error;
pub mod hashing;
pub mod key;
pub mod selftest;
pub mod sorter;

pub use bucket::{table_size_for, Bucket, BucketTable, TableStats};
pub use cardinality::{chao1, sample_and_estimate, CardinalityEstimate, FreqSet};
pub use error::{Error, Result};
pub use hashing::fast_hash;
pub use key::{BucketKey, SortKey};
pub use sorter::{
    cafs_sort, cafs_sort_with, dispatch, fallback_sort, DispatchDecision, Pair, PairList, Route,
    SortConfig, SortTelemetry,
};

/// Bucket of four 64-bit keys.
pub type Bucket64 = Bucket<u64>;
/// Bucket of eight 32-bit keys.
pub type Bucket32 = Bucket<u32>;
pub type BucketTable64 = BucketTable<u64>;
pub type BucketTable32 = BucketTable<u32>;
pub type FreqSet64 = FreqSet<u64>;
pub type FreqSet32 = FreqSet<u32>;
pub type PairList64 = PairList<u64>;
pub type PairList32 = PairList<u32>;
