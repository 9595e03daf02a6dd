//! Key types accepted by the sorter.
//!
//! The counting machinery works on unsigned words ([`BucketKey`]). Signed
//! inputs are mapped onto their unsigned counterpart by flipping the sign
//! bit, which preserves order, and mapped back after the sort ([`SortKey`]).

use std::fmt::Debug;
use std::hash::Hash;

use num_traits::{PrimInt, Unsigned, WrappingMul};

/// An unsigned key word that can live in a cache-line bucket.
///
/// `Lanes` is the key array of one bucket (`[Self; CAP]`) and `Counts` the
/// matching counter array. 64-bit keys get four lanes, 32-bit keys eight, so
/// that keys and counters together fit in one 64-byte line.
pub trait BucketKey:
    PrimInt + Unsigned + WrappingMul + Default + Hash + Debug + Send + Sync + 'static
{
    /// Slots per bucket.
    const CAP: usize;
    /// Width of the key in bytes; also the number of radix passes.
    const BYTES: usize;

    type Lanes: Copy + Default + Debug + AsRef<[Self]> + AsMut<[Self]>;
    type Counts: Copy + Default + Debug + AsRef<[u32]> + AsMut<[u32]>;

    /// Zero-extends the key to 64 bits for hashing.
    fn widen(self) -> u64;

    /// Truncates a 64-bit word to this key width.
    fn narrow(x: u64) -> Self;

    /// Bit `j` of the result is set iff `lanes[j] == val`.
    #[inline(always)]
    fn eq_mask(lanes: &Self::Lanes, val: Self) -> u32 {
        lanes
            .as_ref()
            .iter()
            .enumerate()
            .fold(0u32, |m, (j, &k)| m | (u32::from(k == val) << j))
    }

    /// Same contract as [`BucketKey::eq_mask`], computed with one 256-bit
    /// compare and a movemask.
    ///
    /// # Safety
    ///
    /// The CPU must support AVX2.
    #[cfg(target_arch = "x86_64")]
    unsafe fn eq_mask_avx2(lanes: &Self::Lanes, val: Self) -> u32;
}

impl BucketKey for u64 {
    const CAP: usize = 4;
    const BYTES: usize = 8;
    type Lanes = [u64; 4];
    type Counts = [u32; 4];

    #[inline(always)]
    fn widen(self) -> u64 {
        self
    }

    #[inline(always)]
    fn narrow(x: u64) -> Self {
        x
    }

    #[cfg(target_arch = "x86_64")]
    #[inline(always)]
    unsafe fn eq_mask_avx2(lanes: &[u64; 4], val: u64) -> u32 {
        simd::eq_mask_u64x4(lanes, val)
    }
}

impl BucketKey for u32 {
    const CAP: usize = 8;
    const BYTES: usize = 4;
    type Lanes = [u32; 8];
    type Counts = [u32; 8];

    #[inline(always)]
    fn widen(self) -> u64 {
        u64::from(self)
    }

    #[inline(always)]
    fn narrow(x: u64) -> Self {
        x as u32
    }

    #[cfg(target_arch = "x86_64")]
    #[inline(always)]
    unsafe fn eq_mask_avx2(lanes: &[u32; 8], val: u32) -> u32 {
        simd::eq_mask_u32x8(lanes, val)
    }
}

#[cfg(target_arch = "x86_64")]
mod simd {
    use std::arch::x86_64::*;

    #[inline]
    #[target_feature(enable = "avx2")]
    pub(super) fn eq_mask_u64x4(lanes: &[u64; 4], val: u64) -> u32 {
        // SAFETY: reads exactly 32 bytes from a 32-byte array; unaligned load.
        unsafe {
            let keys = _mm256_loadu_si256(lanes.as_ptr().cast());
            let q = _mm256_set1_epi64x(val as i64);
            let eq = _mm256_cmpeq_epi64(keys, q);
            _mm256_movemask_pd(_mm256_castsi256_pd(eq)) as u32
        }
    }

    #[inline]
    #[target_feature(enable = "avx2")]
    pub(super) fn eq_mask_u32x8(lanes: &[u32; 8], val: u32) -> u32 {
        // SAFETY: as above, 8 x 4 bytes.
        unsafe {
            let keys = _mm256_loadu_si256(lanes.as_ptr().cast());
            let q = _mm256_set1_epi32(val as i32);
            let eq = _mm256_cmpeq_epi32(keys, q);
            _mm256_movemask_ps(_mm256_castsi256_ps(eq)) as u32
        }
    }
}

/// Returns true when the running CPU can take the vectorized match path.
pub fn simd_available() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::arch::is_x86_feature_detected!("avx2")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

/// A fixed-width integer the sorter accepts.
///
/// # Safety
///
/// `Self` and `Self::Unsigned` must have identical size and alignment, and
/// `to_ordered`/`from_ordered` must be mutually inverse, order-preserving
/// bijections.
pub unsafe trait SortKey: Copy + Ord + Debug + Send + Sync + 'static {
    type Unsigned: BucketKey;

    fn to_ordered(self) -> Self::Unsigned;
    fn from_ordered(u: Self::Unsigned) -> Self;
}

macro_rules! unsigned_sort_key {
    ($($t:ty),*) => {$(
        unsafe impl SortKey for $t {
            type Unsigned = $t;

            #[inline(always)]
            fn to_ordered(self) -> $t {
                self
            }

            #[inline(always)]
            fn from_ordered(u: $t) -> $t {
                u
            }
        }
    )*};
}

macro_rules! signed_sort_key {
    ($($s:ty => $u:ty),*) => {$(
        unsafe impl SortKey for $s {
            type Unsigned = $u;

            #[inline(always)]
            fn to_ordered(self) -> $u {
                (self as $u) ^ (1 << (<$u>::BITS - 1))
            }

            #[inline(always)]
            fn from_ordered(u: $u) -> $s {
                (u ^ (1 << (<$u>::BITS - 1))) as $s
            }
        }
    )*};
}

unsigned_sort_key!(u32, u64);
signed_sort_key!(i32 => u32, i64 => u64);

/// Maps every element to its unsigned order-preserving image and returns the
/// same storage viewed as unsigned words.
pub(crate) fn to_ordered_slice<T: SortKey>(data: &mut [T]) -> &mut [T::Unsigned] {
    for x in data.iter_mut() {
        let u = x.to_ordered();
        // SAFETY: size and alignment agree per the `SortKey` contract, so the
        // unsigned word can be stored in place of the original element.
        unsafe { std::ptr::write((x as *mut T).cast::<T::Unsigned>(), u) };
    }
    // SAFETY: every element now holds a valid `T::Unsigned` bit pattern and
    // the layouts agree.
    unsafe { std::slice::from_raw_parts_mut(data.as_mut_ptr().cast(), data.len()) }
}

/// Inverse of [`to_ordered_slice`].
pub(crate) fn from_ordered_slice<T: SortKey>(data: &mut [T::Unsigned]) -> &mut [T] {
    for u in data.iter_mut() {
        let x = T::from_ordered(*u);
        // SAFETY: see `to_ordered_slice`.
        unsafe { std::ptr::write((u as *mut T::Unsigned).cast::<T>(), x) };
    }
    // SAFETY: see `to_ordered_slice`.
    unsafe { std::slice::from_raw_parts_mut(data.as_mut_ptr().cast(), data.len()) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_flip_preserves_order() {
        let xs = [i64::MIN, -5, -1, 0, 1, 7, i64::MAX];
        let us: Vec<u64> = xs.iter().map(|x| x.to_ordered()).collect();
        assert!(us.windows(2).all(|w| w[0] < w[1]));
        for (&x, &u) in xs.iter().zip(&us) {
            assert_eq!(i64::from_ordered(u), x);
        }
        assert_eq!((-1i32).to_ordered(), 0x7FFF_FFFF);
        assert_eq!(0i32.to_ordered(), 0x8000_0000);
    }

    #[test]
    fn scalar_mask_lowest_lanes() {
        let lanes = [3u64, 9, 3, 0];
        assert_eq!(u64::eq_mask(&lanes, 3), 0b0101);
        assert_eq!(u64::eq_mask(&lanes, 0), 0b1000);
        assert_eq!(u64::eq_mask(&lanes, 4), 0);
        let lanes32 = [1u32, 2, 3, 4, 5, 6, 7, 1];
        assert_eq!(u32::eq_mask(&lanes32, 1), 0b1000_0001);
    }

    #[cfg(target_arch = "x86_64")]
    #[test]
    fn avx2_mask_matches_scalar() {
        if !simd_available() {
            return;
        }
        let mut state = 7u64;
        for _ in 0..10_000 {
            let (s, r) = crate::datagen::mix_next(state);
            state = s;
            // small alphabet so matches are frequent
            let lanes = [r & 3, (r >> 8) & 3, (r >> 16) & 3, (r >> 24) & 3];
            let val = (r >> 32) & 3;
            assert_eq!(unsafe { u64::eq_mask_avx2(&lanes, val) }, u64::eq_mask(&lanes, val));
            let lanes32: [u32; 8] = std::array::from_fn(|j| ((r >> (4 * j)) & 3) as u32);
            let v32 = ((r >> 40) & 3) as u32;
            assert_eq!(unsafe { u32::eq_mask_avx2(&lanes32, v32) }, u32::eq_mask(&lanes32, v32));
        }
    }
}
