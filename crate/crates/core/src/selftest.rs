//! Built-in verification suites run by `cafs selftest`.

use std::collections::HashSet;
use std::fmt;

use crate::bucket::BucketTable;
use crate::cardinality::sample_and_estimate;
use crate::datagen::{gen_input, GenSpec, SplitMix64};
use crate::sorter::{cafs_sort, dispatch, main_count_loop, Route};

/// Deliberate defects used to check that the suites catch failures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Bump one element of every sorted output.
    CorruptOutput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Points in the oracle sweep.
    pub points: usize,
    pub fault: Option<Fault>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { seed: crate::datagen::DEFAULT_SEED_BASE, points: 200, fault: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

/// Shape of one sweep input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    SmallN,
    TinyK,
    NearDistinct,
    Moderate,
    Presorted,
}

const SHAPES: [Shape; 5] = [Shape::SmallN, Shape::TinyK, Shape::NearDistinct, Shape::Moderate, Shape::Presorted];

/// One sweep point and what happened to it.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub k: usize,
    pub shape: Shape,
    pub route: Route,
    pub sorted_ok: bool,
    /// Bucket counters plus spill equal `n`, and no spilled key is also in
    /// a bucket, for a table counted straight from the input.
    pub conserved: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn first_failure(&self) -> Option<&SweepPoint> {
        self.points.iter().find(|p| !p.sorted_ok)
    }

    pub fn first_conservation_failure(&self) -> Option<&SweepPoint> {
        self.points.iter().find(|p| !p.conserved)
    }

    pub fn routes_hit(&self) -> HashSet<Route> {
        self.points.iter().map(|p| p.route).collect()
    }
}

fn log_uniform(rng: &mut SplitMix64, lo: usize, hi: usize) -> usize {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let u = rng.next_u64() as f64 / u64::MAX as f64;
    ((a + u * (b - a)).exp().round() as usize).clamp(lo, hi)
}

/// The `(n, k, shape)` triples of the oracle sweep.
pub fn sweep_points(seed: u64, count: usize) -> Vec<(usize, usize, Shape)> {
    let mut rng = SplitMix64::new(seed ^ 0x5EED_5EED_5EED_5EED);
    (0..count)
        .map(|i| {
            let shape = SHAPES[i % SHAPES.len()];
            let (n, k) = match shape {
                Shape::SmallN => {
                    let n = rng.range_inclusive(1_000, 2_047) as usize;
                    (n, rng.range_inclusive(2, n as u64) as usize)
                }
                Shape::TinyK => (log_uniform(&mut rng, 4_096, 1_000_000), rng.range_inclusive(2, 8) as usize),
                Shape::NearDistinct => {
                    let n = log_uniform(&mut rng, 2_048, 1_000_000);
                    (n, rng.range_inclusive(n as u64 / 2, n as u64) as usize)
                }
                Shape::Moderate => {
                    let n = log_uniform(&mut rng, 4_096, 1_000_000);
                    (n, log_uniform(&mut rng, 9, n / 8))
                }
                Shape::Presorted => {
                    let n = log_uniform(&mut rng, 1_000, 1_000_000);
                    (n, log_uniform(&mut rng, 2, n))
                }
            };
            (n, k, shape)
        })
        .collect()
}

/// Sorts every sweep input with `cafs_sort` and compares against the
/// standard sort; also checks counting conservation on each input.
pub fn oracle_sweep(cfg: &SelftestConfig) -> SweepReport {
    let mut report = SweepReport::default();
    for (n, k, shape) in sweep_points(cfg.seed, cfg.points) {
        let spec = GenSpec::new(n, k).with_seed_base(cfg.seed);
        let mut data = gen_input(&spec).expect("sweep points satisfy 2 <= k <= n");
        if shape == Shape::Presorted {
            data.sort_unstable();
        }
        let mut oracle = data.clone();
        oracle.sort_unstable();

        let k_hat = sample_and_estimate(&data).k_hat.max(1.0);
        let table = main_count_loop(&data, k_hat);
        let mut conserved = conserved(&table, n);

        let tel = cafs_sort(&mut data);
        if cfg.fault == Some(Fault::CorruptOutput) {
            data[n / 2] = data[n / 2].wrapping_add(1);
        }
        conserved &= tel.output_len == n && data.len() == n;
        if tel.route == Route::Main {
            conserved &= tel.counted_total == n as u64;
        }
        report.points.push(SweepPoint {
            n,
            k,
            shape,
            route: tel.route,
            sorted_ok: data == oracle,
            conserved,
        });
    }
    report
}

fn conserved(table: &BucketTable<u64>, n: usize) -> bool {
    table.counted_total() == n as u64 && table.spill_disjoint()
}

/// Constructed inputs, one per dispatcher row, with the expected route.
pub fn routing_cases() -> Vec<(&'static str, Vec<u64>, Route)> {
    let distinct: Vec<u64> = (0..10_000u64).map(|i| i.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ 0xABCD).collect();
    vec![
        ("n = 1000", gen_input(&GenSpec::new(1_000, 500)).unwrap(), Route::FallbackSmallN),
        ("n = 10^6, k = 4", gen_input(&GenSpec::new(1_000_000, 4)).unwrap(), Route::TinyCount),
        ("all distinct, n = 10^4", distinct, Route::FallbackHighEntropy),
        ("sorted ramp", (0..100_000u64).collect(), Route::AlreadySorted),
        ("n = 10^6, k = 1000", gen_input(&GenSpec::new(1_000_000, 1_000)).unwrap(), Route::Main),
    ]
}

fn suite_routing() -> SuiteResult {
    let mut bad = Vec::new();
    for (label, mut data, want) in routing_cases() {
        let route = dispatch(&data).route();
        let mut oracle = data.clone();
        oracle.sort_unstable();
        let tel = cafs_sort(&mut data);
        if route != want || tel.route != want || data != oracle {
            bad.push(format!("{label}: got {}", tel.route));
        }
    }
    SuiteResult {
        name: "dispatcher routing",
        passed: bad.is_empty(),
        detail: if bad.is_empty() { "5/5 routes as expected".into() } else { bad.join("; ") },
    }
}

/// Counts how many of `seeds` palette inputs (`n = 10^6`, `K = 100`) are
/// estimated within 20%, and how many all-distinct inputs saturate to `n`.
pub fn estimator_accuracy(seed: u64, seeds: u64) -> (u64, u64) {
    let n = 1_000_000;
    let mut close = 0;
    let mut saturated = 0;
    for s in 0..seeds {
        let x = gen_input(&GenSpec::new(n, 100).with_seed_base(seed.wrapping_add(s))).unwrap();
        let e = sample_and_estimate(&x);
        if (e.k_hat - 100.0).abs() / 100.0 <= 0.2 {
            close += 1;
        }
        let offset = SplitMix64::new(seed ^ s).next_u64();
        let distinct: Vec<u64> = (0..n as u64).map(|i| (i ^ offset).wrapping_mul(0xD6E8_FEB8_6659_FD93)).collect();
        let e = sample_and_estimate(&distinct);
        if e.saturated && e.k_hat == n as f64 {
            saturated += 1;
        }
    }
    (close, saturated)
}

fn suite_estimator(seed: u64) -> SuiteResult {
    let (close, saturated) = estimator_accuracy(seed, 100);
    SuiteResult {
        name: "estimator accuracy",
        passed: close >= 95 && saturated == 100,
        detail: format!("K=100 within 20% on {close}/100 seeds; all-distinct saturated on {saturated}/100"),
    }
}

/// Spill fraction when `M/2` distinct random keys go into `M` buckets.
pub fn spill_fraction(seed: u64, m: usize) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut seen = HashSet::new();
    let mut table = BucketTable::<u64>::new(m);
    while seen.len() < m / 2 {
        let key = rng.next_u64();
        if seen.insert(key) {
            table.update(key, 1);
        }
    }
    let stats = table.stats();
    stats.spill_pushes as f64 / stats.updates as f64
}

fn suite_spill(seed: u64) -> SuiteResult {
    let fractions: Vec<f64> = (0..20).map(|s| spill_fraction(seed.wrapping_add(s), 1 << 16)).collect();
    let worst = fractions.iter().copied().fold(0.0, f64::max);
    let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
    SuiteResult {
        name: "spill bound",
        passed: worst <= 1e-3,
        detail: format!("mean spill fraction {mean:.2e}, worst {worst:.2e} over 20 seeds (limit 1e-3)"),
    }
}

/// Runs every suite.
pub fn run(cfg: &SelftestConfig) -> Vec<SuiteResult> {
    let sweep = oracle_sweep(cfg);
    let routes = sweep.routes_hit();
    let oracle = match sweep.first_failure() {
        Some(p) => SuiteResult {
            name: "oracle equivalence",
            passed: false,
            detail: format!("mismatch at n = {}, k = {} ({:?}, route {})", p.n, p.k, p.shape, p.route),
        },
        None => SuiteResult {
            name: "oracle equivalence",
            passed: routes.len() == Route::ALL.len(),
            detail: format!("{} points match, {} of {} routes exercised", sweep.points.len(), routes.len(), Route::ALL.len()),
        },
    };
    let conservation = match sweep.first_conservation_failure() {
        Some(p) => SuiteResult {
            name: "conservation",
            passed: false,
            detail: format!("violated at n = {}, k = {}", p.n, p.k),
        },
        None => SuiteResult {
            name: "conservation",
            passed: true,
            detail: format!("counters + spill = n and key-disjoint on {} inputs", sweep.points.len()),
        },
    };
    vec![oracle, conservation, suite_routing(), suite_estimator(cfg.seed), suite_spill(cfg.seed)]
}
