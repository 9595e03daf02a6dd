//! Grid benchmark harness.
//!
//! Every `(n, k)` point generates one input; each algorithm sorts its own
//! fresh copy `reps` times and the fastest replicate is kept. Results are
//! checked element-wise against a separately sorted copy.
//!
//! Algorithms run in the configured order at every point. The first one
//! therefore always sees a colder cache than the rest; that bias is not
//! corrected for.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::analysis::hbin;
use crate::datagen::{gen_input, GenSpec};
use crate::error::{Error, Result};
use crate::sorter::cafs_sort;

pub const CSV_HEADER: &str = "algo,n,k,hbin,time_ms,correct";
/// Largest `n` of the desk-scale grid.
pub const DESK_MAX_N: usize = 1_000_000;
/// Largest `n` of the full grid.
pub const FULL_MAX_N: usize = 30_000_000;

/// Something the harness can time.
pub trait SortAlgo {
    fn name(&self) -> &str;
    fn sort(&self, data: &mut [u64]);
}

/// The built-in contenders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    Cafs,
    /// The standard library unstable comparison sort.
    StdSort,
    /// Count with a general-purpose hash map, sort the keys, expand.
    MapCount,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Cafs, Algo::StdSort, Algo::MapCount];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Cafs => "cafs",
            Algo::StdSort => "stdsort",
            Algo::MapCount => "mapcount",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown algorithm {0:?} (expected one of cafs, stdsort, mapcount)")]
pub struct UnknownAlgo(pub String);

impl FromStr for Algo {
    type Err = UnknownAlgo;

    fn from_str(s: &str) -> Result<Self, UnknownAlgo> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownAlgo(s.to_string()))
    }
}

impl SortAlgo for Algo {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn sort(&self, data: &mut [u64]) {
        match self {
            Algo::Cafs => {
                cafs_sort(data);
            }
            Algo::StdSort => data.sort_unstable(),
            Algo::MapCount => map_count_sort(data),
        }
    }
}

/// Hash-count sort on `std::collections::HashMap`.
pub fn map_count_sort(data: &mut [u64]) {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for &v in data.iter() {
        *counts.entry(v).or_default() += 1;
    }
    let mut pairs: Vec<(u64, usize)> = counts.into_iter().collect();
    pairs.sort_unstable_by_key(|p| p.0);
    let mut pos = 0;
    for (k, c) in pairs {
        data[pos..pos + c].fill(k);
        pos += c;
    }
}

/// One timed measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub algo: String,
    pub n: usize,
    pub k: usize,
    /// Fastest replicate, milliseconds.
    pub time_ms: f64,
    pub correct: bool,
}

impl BenchRecord {
    fn sort_key(&self) -> (usize, usize, &str) {
        (self.n, self.k, self.algo.as_str())
    }
}

/// Array lengths of the grid, ascending, up to `max_n`.
///
/// Bands: 1000..50 000 step 2000, 50 000..10^6 step 50 000,
/// 10^6..10^7 step 10^6, 10^7..3·10^7 step 5·10^6 (last point included).
pub fn n_schedule(max_n: usize) -> Vec<usize> {
    const BANDS: [(usize, usize, usize); 4] = [
        (1_000, 50_000, 2_000),
        (50_000, 1_000_000, 50_000),
        (1_000_000, 10_000_000, 1_000_000),
        (10_000_000, 30_000_000, 5_000_000),
    ];
    let mut out: Vec<usize> = BANDS
        .iter()
        .flat_map(|&(lo, hi, step)| (lo..hi).step_by(step))
        .collect();
    out.push(FULL_MAX_N);
    out.retain(|&n| n <= max_n);
    out
}

/// Cardinalities swept at length `n`: step 1 below 200, 10 below 15 000,
/// 500 below 10^5, then `max(5000, k/10)`; always ends with `n`.
pub fn k_schedule(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 2;
    while k < n {
        out.push(k);
        k += match k {
            0..200 => 1,
            200..15_000 => 10,
            15_000..100_000 => 500,
            _ => (k / 10).max(5_000),
        };
    }
    if n >= 2 {
        out.push(n);
    }
    out
}

/// Times `algos` at one grid point.
///
/// A replicate that produces wrong output marks the record incorrect.
pub fn run_point(
    n: usize,
    k: usize,
    seed_base: u64,
    algos: &[&dyn SortAlgo],
    reps: usize,
) -> Result<Vec<BenchRecord>> {
    assert!(reps >= 1, "need at least one replicate");
    let input = gen_input(&GenSpec::new(n, k).with_seed_base(seed_base))?;
    let mut oracle = input.clone();
    oracle.sort_unstable();

    let mut out = Vec::with_capacity(algos.len());
    let mut buf = vec![0u64; n];
    for algo in algos {
        let mut best = f64::INFINITY;
        let mut correct = true;
        for _ in 0..reps {
            buf.copy_from_slice(&input);
            let t = Instant::now();
            algo.sort(&mut buf);
            let elapsed = t.elapsed();
            // clamp so that a coarse clock never yields a zero time
            let ms = (elapsed.as_nanos().max(1) as f64) / 1e6;
            best = best.min(ms);
            correct &= buf == oracle;
        }
        out.push(BenchRecord { algo: algo.name().to_string(), n, k, time_ms: best, correct });
    }
    Ok(out)
}

/// Grid parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub max_n: usize,
    /// Optional cap on the cardinality schedule.
    pub max_k: Option<usize>,
    pub reps: usize,
    pub seed_base: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { max_n: DESK_MAX_N, max_k: None, reps: 2, seed_base: crate::datagen::DEFAULT_SEED_BASE }
    }
}

impl GridConfig {
    /// All `(n, k)` points in run order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        n_schedule(self.max_n)
            .into_iter()
            .flat_map(|n| {
                k_schedule(n)
                    .into_iter()
                    .filter(|&k| self.max_k.is_none_or(|cap| k <= cap))
                    .map(move |k| (n, k))
            })
            .collect()
    }
}

/// Runs the whole grid, handing each point's records to `sink` as soon as
/// they are measured.
pub fn run_grid(
    config: &GridConfig,
    algos: &[&dyn SortAlgo],
    mut sink: impl FnMut(&[BenchRecord]) -> Result<()>,
) -> Result<()> {
    for (n, k) in config.points() {
        let records = run_point(n, k, config.seed_base, algos, config.reps)?;
        sink(&records)?;
    }
    Ok(())
}

/// Streaming CSV writer; rows within one point are ordered by algorithm
/// name.
pub struct CsvSink<W: Write = BufWriter<File>> {
    path: PathBuf,
    out: W,
}

impl CsvSink {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_writer(BufWriter::new(file), path)
    }
}

impl<W: Write> CsvSink<W> {
    /// Writes to `out`; `label` names the destination in error messages.
    pub fn from_writer(out: W, label: impl Into<PathBuf>) -> Result<Self> {
        let mut sink = Self { path: label.into(), out };
        sink.line(CSV_HEADER.to_string())?;
        Ok(sink)
    }

    pub fn write_records(&mut self, records: &[BenchRecord]) -> Result<()> {
        let mut sorted: Vec<&BenchRecord> = records.iter().collect();
        sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        for r in sorted {
            self.line(format_row(r))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }

    fn line(&mut self, s: String) -> Result<()> {
        writeln!(self.out, "{s}").map_err(|e| Error::io(&self.path, e))
    }
}

fn format_row(r: &BenchRecord) -> String {
    let bin = hbin(r.k as u64).map(|b| b.to_string()).unwrap_or_default();
    format!("{},{},{},{},{},{}", r.algo, r.n, r.k, bin, r.time_ms, r.correct)
}

/// Writes `records` sorted by `(n, k, algo)`.
pub fn write_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut sink = CsvSink::create(path)?;
    sink.write_records(records)?;
    sink.finish()
}

/// Parses a bench CSV. An empty file yields no records.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 1;
        let row = row.map_err(|e| csv_error(path, line, e))?;
        if i == 0 {
            let header: Vec<&str> = row.iter().collect();
            if header.join(",") != CSV_HEADER {
                return Err(bad_row(path, line, format!("expected header {CSV_HEADER:?}")));
            }
            continue;
        }
        out.push(parse_row(&row).map_err(|m| bad_row(path, line, m))?);
    }
    Ok(out)
}

fn parse_row(row: &csv::StringRecord) -> Result<BenchRecord, String> {
    if row.len() != 6 {
        return Err(format!("expected 6 fields, found {}", row.len()));
    }
    fn field<T: FromStr>(row: &csv::StringRecord, i: usize, name: &str) -> Result<T, String> {
        row[i].trim().parse().map_err(|_| format!("bad {name} {:?}", &row[i]))
    }
    let rec = BenchRecord {
        algo: row[0].trim().to_string(),
        n: field(row, 1, "n")?,
        k: field(row, 2, "k")?,
        time_ms: field(row, 4, "time_ms")?,
        correct: field(row, 5, "correct")?,
    };
    if rec.algo.is_empty() {
        return Err("empty algo".into());
    }
    if rec.time_ms.is_nan() || rec.time_ms <= 0.0 || rec.time_ms.is_infinite() {
        return Err(format!("time_ms must be positive, got {}", rec.time_ms));
    }
    Ok(rec)
}

fn csv_error(path: &Path, fallback_line: u64, e: csv::Error) -> Error {
    if let csv::ErrorKind::Io(_) = e.kind() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::io(path, io);
        }
        unreachable!()
    }
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    bad_row(path, line, e.to_string())
}

fn bad_row(path: &Path, line: u64, message: String) -> Error {
    Error::Csv { path: path.to_path_buf(), line, message }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_schedule_has_58_points() {
        let s = n_schedule(FULL_MAX_N);
        assert_eq!(s.len(), 58);
        assert_eq!(s[0], 1_000);
        assert_eq!(*s.last().unwrap(), 30_000_000);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn first_band() {
        let s = n_schedule(50_000);
        let expected: Vec<usize> = (1_000..50_000).step_by(2_000).chain([50_000]).collect();
        assert_eq!(s, expected);
        assert_eq!(s.len(), 26);
        assert_eq!(n_schedule(1_000), vec![1_000]);
        assert_eq!(n_schedule(DESK_MAX_N).len(), 45);
    }

    #[test]
    fn k_schedule_bands() {
        assert_eq!(k_schedule(100), (2..=100).collect::<Vec<_>>());
        let expected: Vec<usize> = (2..200).chain((200..=1000).step_by(10)).collect();
        assert_eq!(k_schedule(1000), expected);
        assert_eq!(k_schedule(2), vec![2]);
        assert_eq!(k_schedule(3), vec![2, 3]);
    }

    #[test]
    fn k_schedule_geometric_tail() {
        let s = k_schedule(1_000_000);
        assert!(s.iter().all(|&k| k <= 1_000_000));
        assert_eq!(*s.last().unwrap(), 1_000_000);
        let tail: Vec<usize> = s.iter().copied().filter(|&k| k >= 100_000).collect();
        for w in tail.windows(2) {
            if w[1] == 1_000_000 {
                break;
            }
            assert_eq!(w[1] - w[0], (w[0] / 10).max(5_000));
        }
        // once k >= 50 000 the step is k/10
        let i = s.iter().position(|&k| k >= 100_000).unwrap();
        assert_eq!(s[i + 1] - s[i], s[i] / 10);
    }

    struct Broken;

    impl SortAlgo for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn sort(&self, data: &mut [u64]) {
            data.sort_unstable();
            data.reverse();
        }
    }

    #[test]
    fn point_records() {
        let recs = run_point(10_000, 16, 42, &[&Algo::Cafs, &Algo::StdSort], 2).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.correct && r.time_ms > 0.0));
        assert_eq!(recs[0].algo, "cafs");
    }

    #[test]
    fn broken_algo_flagged() {
        let recs = run_point(5_000, 10, 42, &[&Broken, &Algo::MapCount], 1).unwrap();
        assert!(!recs[0].correct);
        assert!(recs[1].correct);
    }

    #[test]
    fn algo_names_parse() {
        for a in Algo::ALL {
            assert_eq!(a.as_str().parse::<Algo>().unwrap(), a);
        }
        assert!("quick".parse::<Algo>().is_err());
    }

    #[test]
    fn map_count_sorts() {
        let mut v = vec![5u64, 1, 5, 3, 1];
        map_count_sort(&mut v);
        assert_eq!(v, [1, 1, 3, 5, 5]);
    }

    #[test]
    fn csv_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_csv(&[], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), format!("{CSV_HEADER}\n"));
        assert!(read_csv(&p).unwrap().is_empty());
    }

    #[test]
    fn csv_round_trip_and_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let recs = vec![
            BenchRecord { algo: "stdsort".into(), n: 2000, k: 3, time_ms: 0.125, correct: true },
            BenchRecord { algo: "cafs".into(), n: 2000, k: 3, time_ms: 0.1 + 0.2, correct: false },
            BenchRecord { algo: "cafs".into(), n: 1000, k: 17, time_ms: 1e-6, correct: true },
        ];
        write_csv(&recs, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().nth(1).unwrap(), "cafs,1000,17,4,0.000001,true");
        let back = read_csv(&p).unwrap();
        assert_eq!(back, vec![recs[2].clone(), recs[1].clone(), recs[0].clone()]);
    }

    #[test]
    fn malformed_row_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, format!("{CSV_HEADER}\ncafs,10,2,1,0.5,true\ncafs,ten,2,1,0.5,true\n")).unwrap();
        let err = read_csv(&p).unwrap_err();
        match err {
            Error::Csv { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        assert!(read_csv(dir.path().join("missing.csv")).is_err());
    }

    #[test]
    fn grid_points_respect_caps() {
        let cfg = GridConfig { max_n: 3_000, max_k: Some(5), reps: 1, seed_base: 42 };
        assert_eq!(cfg.points(), vec![(1000, 2), (1000, 3), (1000, 4), (1000, 5), (3000, 2), (3000, 3), (3000, 4), (3000, 5)]);
    }
}
