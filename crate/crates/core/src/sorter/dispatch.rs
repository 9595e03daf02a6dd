use crate::cardinality::{sample, CardinalityEstimate};
use crate::key::BucketKey;

use super::telemetry::Route;

/// Inputs shorter than this go straight to the comparison sort; sampling
/// would not pay for itself.
pub const SMALL_N: usize = 2048;
/// Largest key set handled by the tiny-count branch.
pub const TINY_KEYS: usize = 8;
/// Longest input the counting path accepts (bucket counters are 32-bit).
pub const MAX_COUNTED_LEN: usize = u32::MAX as usize;

/// The branch chosen for an input, with whatever the branch needs.
#[derive(Clone, Debug, PartialEq)]
pub enum DispatchDecision<K> {
    AlreadySorted,
    FallbackSmallN,
    /// Up to eight sampled keys, ascending.
    TinyCount { keys: Vec<K>, estimate: CardinalityEstimate },
    FallbackHighEntropy { estimate: CardinalityEstimate },
    Main { estimate: CardinalityEstimate },
}

impl<K> DispatchDecision<K> {
    pub fn route(&self) -> Route {
        match self {
            DispatchDecision::AlreadySorted => Route::AlreadySorted,
            DispatchDecision::FallbackSmallN => Route::FallbackSmallN,
            DispatchDecision::TinyCount { .. } => Route::TinyCount,
            DispatchDecision::FallbackHighEntropy { .. } => Route::FallbackHighEntropy,
            DispatchDecision::Main { .. } => Route::Main,
        }
    }

    pub fn estimate(&self) -> Option<&CardinalityEstimate> {
        match self {
            DispatchDecision::TinyCount { estimate, .. }
            | DispatchDecision::FallbackHighEntropy { estimate }
            | DispatchDecision::Main { estimate } => Some(estimate),
            _ => None,
        }
    }
}

/// True iff `x` is non-decreasing. Stops at the first inversion.
pub fn is_monotone<K: PartialOrd>(x: &[K]) -> bool {
    x.windows(2).all(|w| w[0] <= w[1])
}

/// Chooses the branch for `x`:
///
/// | condition                 | branch                 |
/// |---------------------------|------------------------|
/// | non-decreasing            | already sorted         |
/// | `n < 2048`                | comparison sort        |
/// | `k̂ ≤ 8 ∧ u ≤ 8`           | tiny count             |
/// | `2·k̂ > n`                 | comparison sort        |
/// | otherwise                 | main counting path     |
///
/// Inputs longer than `u32::MAX` also take the high-entropy fallback.
pub fn dispatch<K: BucketKey>(x: &[K]) -> DispatchDecision<K> {
    let n = x.len();
    if is_monotone(x) {
        return DispatchDecision::AlreadySorted;
    }
    if n < SMALL_N {
        return DispatchDecision::FallbackSmallN;
    }
    let set = sample(x);
    let estimate = set.estimate(n);
    if estimate.k_hat <= TINY_KEYS as f64 && estimate.u <= TINY_KEYS {
        let mut keys: Vec<K> = set.entries().map(|(k, _)| k).collect();
        keys.sort_unstable();
        return DispatchDecision::TinyCount { keys, estimate };
    }
    if estimate.k_hat * 2.0 > n as f64 || n > MAX_COUNTED_LEN {
        return DispatchDecision::FallbackHighEntropy { estimate };
    }
    DispatchDecision::Main { estimate }
}
