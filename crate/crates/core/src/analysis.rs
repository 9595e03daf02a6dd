//! Entropy-bin statistics over bench records.
//!
//! Points are grouped by `⌊log2 K⌋`. Within a bin we report the mean,
//! minimum and maximum of `t_baseline / t_cafs` and the fraction of points
//! where that ratio exceeds 1.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::bench::BenchRecord;
use crate::error::{Error, Result};

/// Algorithm id the baselines are compared against.
pub const CAFS: &str = "cafs";
/// Default lower bound (exclusive) on `n` for crossover detection.
pub const CROSSOVER_N_MIN: usize = 1_000_000;
pub const BINS_CSV_HEADER: &str = "baseline,hbin,k_lo,k_hi,avg,min,max,win_rate,count";

/// `⌊log2 k⌋` for `k ≥ 2`.
pub fn hbin(k: u64) -> Result<u32> {
    if k < 2 {
        return Err(Error::InvalidCardinality(k));
    }
    Ok(k.ilog2())
}

/// `t_baseline / t_cafs`; above 1 means cafs was faster.
pub fn speedup(t_baseline: f64, t_cafs: f64) -> Result<f64> {
    for t in [t_baseline, t_cafs] {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::NonPositiveTime(t));
        }
    }
    Ok(t_baseline / t_cafs)
}

/// A grid point measured by both cafs and a baseline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JoinedPoint {
    pub n: usize,
    pub k: usize,
    pub speedup: f64,
}

/// Aggregate of one entropy bin, `K ∈ [k_lo, k_hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinStats {
    pub hbin: u32,
    pub k_lo: u64,
    pub k_hi: u64,
    pub avg: f64,
    pub min: f64,
    pub max: f64,
    pub win_rate: f64,
    pub count: usize,
}

/// Fastest correct time per `(n, k)` for one algorithm.
fn best_times(records: &[BenchRecord], algo: &str) -> BTreeMap<(usize, usize), f64> {
    let mut out = BTreeMap::new();
    for r in records.iter().filter(|r| r.correct && r.algo == algo) {
        out.entry((r.n, r.k))
            .and_modify(|t: &mut f64| *t = t.min(r.time_ms))
            .or_insert(r.time_ms);
    }
    out
}

/// Joins cafs and `baseline` on `(n, k)`. Incorrect rows and points missing
/// either side are dropped. Output is ordered by `(n, k)`.
pub fn join(records: &[BenchRecord], baseline: &str) -> Result<Vec<JoinedPoint>> {
    let cafs = best_times(records, CAFS);
    let base = best_times(records, baseline);
    let mut out = Vec::new();
    for (&(n, k), &tb) in &base {
        if let Some(&tc) = cafs.get(&(n, k)) {
            if k < 2 {
                return Err(Error::InvalidCardinality(k as u64));
            }
            out.push(JoinedPoint { n, k, speedup: speedup(tb, tc)? });
        }
    }
    Ok(out)
}

/// Per-bin statistics of joined points, ascending by bin.
pub fn bins_from_points(points: &[JoinedPoint]) -> Vec<BinStats> {
    let mut groups: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for p in points {
        groups.entry((p.k as u64).ilog2()).or_default().push(p.speedup);
    }
    groups
        .into_iter()
        .map(|(bin, s)| {
            let count = s.len();
            let min = s.iter().copied().fold(f64::INFINITY, f64::min);
            let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let avg = (s.iter().sum::<f64>() / count as f64).clamp(min, max);
            let wins = s.iter().filter(|&&x| x > 1.0).count();
            BinStats {
                hbin: bin,
                k_lo: 1 << bin,
                k_hi: 1 << (bin + 1),
                avg,
                min,
                max,
                win_rate: wins as f64 / count as f64,
                count,
            }
        })
        .collect()
}

/// Speedup statistics of cafs over `baseline` by entropy bin.
pub fn aggregate_bins(records: &[BenchRecord], baseline: &str) -> Result<Vec<BinStats>> {
    Ok(bins_from_points(&join(records, baseline)?))
}

/// Crossover over already joined points: the highest bin with a win rate
/// of at least one half, represented by the largest `k` seen in it.
pub fn crossover_from_points(points: &[JoinedPoint]) -> Option<usize> {
    let bins = bins_from_points(points);
    let bin = bins.iter().rev().find(|b| b.win_rate >= 0.5)?.hbin;
    points.iter().filter(|p| (p.k as u64).ilog2() == bin).map(|p| p.k).max()
}

/// Largest cardinality at which cafs still wins at least half the points of
/// its entropy bin, considering only points with `n > n_min`.
pub fn crossover(records: &[BenchRecord], baseline: &str, n_min: usize) -> Result<Option<usize>> {
    let points: Vec<JoinedPoint> = join(records, baseline)?.into_iter().filter(|p| p.n > n_min).collect();
    Ok(crossover_from_points(&points))
}

/// Sample Pearson correlation. `None` when fewer than two pairs are given
/// or either coordinate has zero variance.
pub fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let len = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / len;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation between `ln n` and speedup over `(n, speedup)` pairs.
pub fn pearson_log_n(points: &[(usize, f64)]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = points.iter().map(|&(n, s)| ((n as f64).ln(), s)).collect();
    pearson(&pairs)
}

/// Points lying in bins where cafs wins at least half the time.
pub fn dominance_zone(points: &[JoinedPoint]) -> Vec<JoinedPoint> {
    let winning: Vec<u32> = bins_from_points(points)
        .iter()
        .filter(|b| b.win_rate >= 0.5)
        .map(|b| b.hbin)
        .collect();
    points.iter().copied().filter(|p| winning.contains(&(p.k as u64).ilog2())).collect()
}

/// Everything reported for one baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineReport {
    pub baseline: String,
    pub bins: Vec<BinStats>,
    pub points: usize,
    pub crossover: Option<usize>,
    /// `ln n` vs speedup inside the dominance zone.
    pub r_log_n: Option<f64>,
}

/// Builds the report for `baseline`; fails with [`Error::NoJoin`] when no
/// point was measured by both sides.
pub fn report(records: &[BenchRecord], baseline: &str, n_min: usize) -> Result<BaselineReport> {
    let points = join(records, baseline)?;
    if points.is_empty() {
        return Err(Error::NoJoin { baseline: baseline.to_string() });
    }
    let bins = bins_from_points(&points);
    let big: Vec<JoinedPoint> = points.iter().copied().filter(|p| p.n > n_min).collect();
    let zone: Vec<(usize, f64)> = dominance_zone(&points).iter().map(|p| (p.n, p.speedup)).collect();
    Ok(BaselineReport {
        baseline: baseline.to_string(),
        bins,
        points: points.len(),
        crossover: crossover_from_points(&big),
        r_log_n: pearson_log_n(&zone),
    })
}

/// Algorithm ids other than cafs, in first-seen order.
pub fn baselines_in(records: &[BenchRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        if r.algo != CAFS && !out.contains(&r.algo) {
            out.push(r.algo.clone());
        }
    }
    out
}

pub fn write_bins_csv(reports: &[BaselineReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{BINS_CSV_HEADER}").map_err(io)?;
    for rep in reports {
        for b in &rep.bins {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                rep.baseline, b.hbin, b.k_lo, b.k_hi, b.avg, b.min, b.max, b.win_rate, b.count
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Human-readable summary, one block per baseline.
pub fn summary_text(reports: &[BaselineReport], n_min: usize) -> String {
    let mut s = String::new();
    for rep in reports {
        let _ = writeln!(s, "baseline {} ({} points)", rep.baseline, rep.points);
        let _ = writeln!(s, "  {:>4} {:>17} {:>8} {:>8} {:>8} {:>7} {:>6}", "bin", "K range", "avg", "min", "max", "win", "count");
        for b in &rep.bins {
            let _ = writeln!(
                s,
                "  {:>4} {:>17} {:>8.3} {:>8.3} {:>8.3} {:>6.1}% {:>6}",
                b.hbin,
                format!("{}..{}", b.k_lo, b.k_hi),
                b.avg,
                b.min,
                b.max,
                100.0 * b.win_rate,
                b.count
            );
        }
        match rep.crossover {
            Some(k) => {
                let _ = writeln!(s, "  crossover (n > {n_min}): K* = {k}");
            }
            None => {
                let _ = writeln!(s, "  crossover (n > {n_min}): none");
            }
        }
        match rep.r_log_n {
            Some(r) => {
                let _ = writeln!(s, "  pearson r(ln n, speedup) in dominance zone: {r:.4}");
            }
            None => {
                let _ = writeln!(s, "  pearson r(ln n, speedup) in dominance zone: undefined");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(algo: &str, n: usize, k: usize, t: f64) -> BenchRecord {
        BenchRecord { algo: algo.into(), n, k, time_ms: t, correct: true }
    }

    #[test]
    fn hbin_values() {
        assert_eq!(hbin(2).unwrap(), 1);
        assert_eq!(hbin(3).unwrap(), 1);
        assert_eq!(hbin(1024).unwrap(), 10);
        assert_eq!(hbin(16383).unwrap(), 13);
        assert_eq!(hbin(16383).unwrap(), 64 - 16383u64.leading_zeros() - 1);
        assert!(hbin(1).is_err());
        assert!(hbin(0).is_err());
    }

    #[test]
    fn speedup_values() {
        assert_eq!(speedup(2.0, 1.0).unwrap(), 2.0);
        assert_eq!(speedup(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(speedup(0.5, 1.0).unwrap(), 0.5);
        assert!(speedup(0.0, 1.0).is_err());
        assert!(speedup(1.0, -1.0).is_err());
        assert!(speedup(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn single_point_bin() {
        let recs = [rec("cafs", 100, 9, 1.0), rec("stdsort", 100, 9, 2.0)];
        let bins = aggregate_bins(&recs, "stdsort").unwrap();
        assert_eq!(
            bins,
            vec![BinStats { hbin: 3, k_lo: 8, k_hi: 16, avg: 2.0, min: 2.0, max: 2.0, win_rate: 1.0, count: 1 }]
        );
    }

    #[test]
    fn three_point_bin() {
        let recs = [
            rec("cafs", 100, 8, 2.0),
            rec("b", 100, 8, 1.0),
            rec("cafs", 200, 9, 1.0),
            rec("b", 200, 9, 1.5),
            rec("cafs", 300, 15, 1.0),
            rec("b", 300, 15, 3.0),
        ];
        let bins = aggregate_bins(&recs, "b").unwrap();
        assert_eq!(bins.len(), 1);
        assert!((bins[0].avg - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(bins[0].win_rate, 2.0 / 3.0);
        assert_eq!((bins[0].min, bins[0].max), (0.5, 3.0));
    }

    #[test]
    fn two_bins_ascending() {
        let recs = [
            rec("b", 100, 5, 1.0),
            rec("cafs", 100, 5, 1.0),
            rec("b", 100, 2, 1.0),
            rec("cafs", 100, 2, 1.0),
        ];
        let bins = aggregate_bins(&recs, "b").unwrap();
        assert_eq!(bins.iter().map(|b| b.hbin).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(bins[0].win_rate, 0.0);
    }

    #[test]
    fn join_uses_min_and_drops_incorrect() {
        let mut bad = rec("cafs", 100, 4, 0.01);
        bad.correct = false;
        let recs = [
            rec("cafs", 100, 4, 2.0),
            rec("cafs", 100, 4, 1.0),
            bad,
            rec("b", 100, 4, 3.0),
            rec("b", 100, 5, 3.0),
        ];
        let pts = join(&recs, "b").unwrap();
        assert_eq!(pts, vec![JoinedPoint { n: 100, k: 4, speedup: 3.0 }]);
    }

    fn synth(bins: &[(std::ops::RangeInclusive<usize>, &[f64])]) -> Vec<BenchRecord> {
        let mut out = Vec::new();
        let n = 2_000_000;
        for (ks, speedups) in bins {
            for (k, &s) in ks.clone().zip(speedups.iter()) {
                out.push(rec("cafs", n, k, 1.0));
                out.push(rec("b", n, k, s));
            }
        }
        out
    }

    #[test]
    fn crossover_rule() {
        // win rates 0.9-ish, 0.6, 0.4 over bins 2, 3, 4
        let recs = synth(&[
            (4..=7, &[2.0, 2.0, 2.0, 0.5]),
            (8..=12, &[2.0, 2.0, 2.0, 0.5, 0.5]),
            (16..=20, &[2.0, 2.0, 0.5, 0.5, 0.5]),
        ]);
        assert_eq!(crossover(&recs, "b", CROSSOVER_N_MIN).unwrap(), Some(12));
        // below n_min nothing counts
        assert_eq!(crossover(&recs, "b", 2_000_000).unwrap(), None);
    }

    #[test]
    fn crossover_all_or_nothing() {
        let all = synth(&[(4..=7, &[2.0; 4]), (8..=9, &[3.0; 2])]);
        assert_eq!(crossover(&all, "b", CROSSOVER_N_MIN).unwrap(), Some(9));
        let none = synth(&[(4..=7, &[0.5; 4]), (8..=9, &[1.0; 2])]);
        assert_eq!(crossover(&none, "b", CROSSOVER_N_MIN).unwrap(), None);
    }

    #[test]
    fn pearson_cases() {
        let exact: Vec<(usize, f64)> = [1000usize, 5000, 20_000, 1_000_000].iter().map(|&n| (n, 2.0 * (n as f64).ln())).collect();
        assert!((pearson_log_n(&exact).unwrap() - 1.0).abs() < 1e-12);
        let flat: Vec<(usize, f64)> = [1000usize, 5000].iter().map(|&n| (n, 1.5)).collect();
        assert_eq!(pearson_log_n(&flat), None);
        assert_eq!(pearson_log_n(&[(1000, 1.0), (1000, 2.0)]), None);
        assert_eq!(pearson(&[(1.0, 1.0)]), None);
    }

    #[test]
    fn pearson_hand_computed() {
        // x = 1..5, y = 2,4,5,4,5: sxy = 6, sxx = 10, syy = 6
        let pairs = [(1.0, 2.0), (2.0, 4.0), (3.0, 5.0), (4.0, 4.0), (5.0, 5.0)];
        let expected = 6.0 / (10.0f64 * 6.0).sqrt();
        assert!((pearson(&pairs).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn report_requires_join() {
        let recs = [rec("b", 100, 4, 1.0)];
        assert!(matches!(report(&recs, "b", 0), Err(Error::NoJoin { .. })));
    }

    #[test]
    fn baselines_listed_in_order() {
        let recs = [rec("cafs", 1, 2, 1.0), rec("stdsort", 1, 2, 1.0), rec("mapcount", 1, 2, 1.0), rec("stdsort", 2, 2, 1.0)];
        assert_eq!(baselines_in(&recs), vec!["stdsort", "mapcount"]);
    }
}
