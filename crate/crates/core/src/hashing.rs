//! Fibonacci (multiplicative) hashing.

/// 2^64 / φ, rounded to odd.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Maps `x` to a bucket index in `[0, 2^m_log2)` by keeping the top
/// `m_log2` bits of `x · GOLDEN_GAMMA mod 2^64`.
///
/// Arithmetic progressions, which modulo hashing folds onto every M-th
/// bucket, spread almost evenly under this map.
#[inline(always)]
pub fn fast_hash(x: u64, m_log2: u32) -> usize {
    debug_assert!((1..64).contains(&m_log2), "m_log2 out of range: {m_log2}");
    (x.wrapping_mul(GOLDEN_GAMMA) >> (64 - m_log2)) as usize
}

/// Same as [`fast_hash`] with a caller-chosen odd multiplier.
///
/// The sorter always uses [`GOLDEN_GAMMA`]; this exists so that randomized
/// seeding can be layered on without touching the table code.
#[inline(always)]
pub fn fast_hash_seeded(x: u64, m_log2: u32, multiplier: u64) -> usize {
    debug_assert!(multiplier & 1 == 1);
    debug_assert!((1..64).contains(&m_log2));
    (x.wrapping_mul(multiplier) >> (64 - m_log2)) as usize
}
