use cafs::analysis::{self, hbin, speedup};
use cafs::bench::{self, BenchRecord};
use cafs::sorter::main_count_loop;
use cafs::{cafs_sort, BucketTable};
use proptest::prelude::*;

/// Inputs with a controllable number of distinct values, long enough to
/// leave the small-n fallback some of the time.
fn low_card_input() -> impl Strategy<Value = Vec<u64>> {
    (1usize..300, 0usize..6000, any::<u64>()).prop_flat_map(|(k, n, salt)| {
        prop::collection::vec(0..k as u64, n)
            .prop_map(move |v| v.into_iter().map(|x| x.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt).collect())
    })
}

fn record() -> impl Strategy<Value = BenchRecord> {
    (
        prop::sample::select(vec!["cafs", "stdsort", "mapcount"]),
        1usize..50_000_000,
        2usize..50_000_000,
        1e-6f64..1e6,
        any::<bool>(),
    )
        .prop_map(|(algo, n, k, time_ms, correct)| BenchRecord { algo: algo.into(), n, k, time_ms, correct })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_is_sorted_permutation(mut x in low_card_input()) {
        let mut want = x.clone();
        want.sort_unstable();
        let tel = cafs_sort(&mut x);
        prop_assert_eq!(tel.output_len, x.len());
        prop_assert_eq!(x, want);
    }

    #[test]
    fn signed_output_is_sorted_permutation(x in prop::collection::vec(-40i64..40, 0..5000), scale in any::<i64>()) {
        let mut x: Vec<i64> = x.into_iter().map(|v| v.wrapping_mul(scale | 1)).collect();
        let mut want = x.clone();
        want.sort_unstable();
        cafs_sort(&mut x);
        prop_assert_eq!(x, want);
    }

    #[test]
    fn u32_output_is_sorted_permutation(x in prop::collection::vec(0u32..500, 0..6000)) {
        let mut x: Vec<u32> = x.into_iter().map(|v| v.wrapping_mul(2_654_435_761)).collect();
        let mut want = x.clone();
        want.sort_unstable();
        cafs_sort(&mut x);
        prop_assert_eq!(x, want);
    }

    #[test]
    fn counting_conserves_and_keeps_spill_disjoint(x in low_card_input(), k_hat in 1.0f64..2000.0) {
        let t = main_count_loop(&x, k_hat);
        prop_assert_eq!(t.counted_total(), x.len() as u64);
        prop_assert!(t.spill_disjoint());
    }

    #[test]
    fn run_folding_does_not_change_counts(x in low_card_input(), seed in any::<u64>()) {
        // grouped and shuffled orders of the same multiset count identically
        let mut grouped = x.clone();
        grouped.sort_unstable();
        let mut shuffled = x;
        let mut s = seed | 1;
        for i in (1..shuffled.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let count = |v: &[u64]| {
            let mut t = BucketTable::<u64>::new(1 << 12);
            let mut rest = v;
            while let Some((&a, tail)) = rest.split_first() {
                let run = 1 + tail.iter().take_while(|&&b| b == a).count();
                t.update(a, run as u32);
                rest = &rest[run..];
            }
            let mut occ: Vec<(u64, u32)> = t.occupied().collect();
            occ.sort_unstable();
            let mut spill = t.spill().to_vec();
            spill.sort_unstable();
            (occ, spill)
        };
        let a = count(&grouped);
        let b = count(&shuffled);
        // a key spills only when its bucket is full, and which keys claim a
        // bucket first depends on order, so compare the merged multiset
        let merge = |(occ, spill): (Vec<(u64, u32)>, Vec<u64>)| {
            let mut all: Vec<(u64, u64)> = occ.into_iter().map(|(k, c)| (k, u64::from(c))).collect();
            for v in spill { all.push((v, 1)); }
            all.sort_unstable();
            let mut out: Vec<(u64, u64)> = Vec::new();
            for (k, c) in all {
                match out.last_mut() {
                    Some(last) if last.0 == k => last.1 += c,
                    _ => out.push((k, c)),
                }
            }
            out
        };
        prop_assert_eq!(merge(a), merge(b));
    }

    #[test]
    fn speedup_is_reciprocal(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
        let p = speedup(a, b).unwrap() * speedup(b, a).unwrap();
        prop_assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hbin_is_monotone(a in 2u64.., b in 2u64..) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(hbin(lo).unwrap() <= hbin(hi).unwrap());
        let h = hbin(lo).unwrap();
        prop_assert!(1u64 << h <= lo && (h == 63 || lo < 1u64 << (h + 1)));
    }

    #[test]
    fn bins_ignore_record_order(records in prop::collection::vec(record(), 0..60), seed in any::<u64>()) {
        let mut shuffled = records.clone();
        let mut s = seed | 1;
        for i in (1..shuffled.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let a = analysis::aggregate_bins(&records, "stdsort").unwrap();
        let b = analysis::aggregate_bins(&shuffled, "stdsort").unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!((x.hbin, x.count, x.min, x.max, x.win_rate), (y.hbin, y.count, y.min, y.max, y.win_rate));
            prop_assert!((x.avg - y.avg).abs() <= 1e-12 * x.avg.abs());
            prop_assert!(x.min <= x.avg && x.avg <= x.max);
        }
    }

    #[test]
    fn bench_csv_roundtrip(records in prop::collection::vec(record(), 0..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        bench::write_csv(&records, &path).unwrap();
        let mut back = bench::read_csv(&path).unwrap();
        let mut want = records;
        let key = |r: &BenchRecord| (r.n, r.k, r.algo.clone(), r.time_ms.to_bits(), r.correct);
        want.sort_by_key(key);
        back.sort_by_key(key);
        prop_assert_eq!(back, want);
    }
}
