use std::fmt;
use std::time::Duration;

use crate::bucket::TableStats;
use crate::cardinality::CardinalityEstimate;

/// Which branch of the pipeline an input took.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Route {
    #[default]
    AlreadySorted,
    FallbackSmallN,
    TinyCount,
    FallbackHighEntropy,
    Main,
}

impl Route {
    pub const ALL: [Route; 5] = [
        Route::AlreadySorted,
        Route::FallbackSmallN,
        Route::TinyCount,
        Route::FallbackHighEntropy,
        Route::Main,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Route::AlreadySorted => "already-sorted",
            Route::FallbackSmallN => "fallback-small-n",
            Route::TinyCount => "tiny-count",
            Route::FallbackHighEntropy => "fallback-high-entropy",
            Route::Main => "main",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Wall time per stage. `count`, `sort_k` and `emit` are the three terms of
/// the hash-count cost decomposition; `fallback` is time spent in the
/// comparison sort on any route that uses it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageTimings {
    pub sample: Duration,
    pub count: Duration,
    pub sort_k: Duration,
    pub emit: Duration,
    pub fallback: Duration,
}

/// What one `cafs_sort` call did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SortTelemetry {
    /// Final route. A tiny-count miss reports `Main`.
    pub route: Route,
    pub estimate: Option<CardinalityEstimate>,
    /// The tiny-count branch ran, failed its sum check and fell into `Main`.
    pub tiny_count_fell_through: bool,
    pub table_buckets: usize,
    pub table_stats: Option<TableStats>,
    /// Sum of bucket counters plus spill length when reconstruction began.
    pub counted_total: u64,
    pub spill_len: usize,
    /// Distinct `(key, count)` pairs after merging buckets and spill.
    pub pairs: usize,
    /// Spill exceeded half the input and the count was discarded.
    pub guard_fired: bool,
    pub output_len: usize,
    pub timings: StageTimings,
}

impl fmt::Display for SortTelemetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "route={} n={}", self.route, self.output_len)?;
        if let Some(e) = &self.estimate {
            write!(f, " k_hat={:.1} u={} f1={} f2={}", e.k_hat, e.u, e.f1, e.f2)?;
        }
        if self.route == Route::Main {
            write!(
                f,
                " buckets={} spill={} pairs={} guard={}",
                self.table_buckets, self.spill_len, self.pairs, self.guard_fired
            )?;
        }
        if self.tiny_count_fell_through {
            f.write_str(" tiny-count-miss")?;
        }
        let t = &self.timings;
        write!(
            f,
            " count={:?} sort_k={:?} emit={:?} fallback={:?}",
            t.count, t.sort_k, t.emit, t.fallback
        )
    }
}
