use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cafs::analysis::{self, BaselineReport, CROSSOVER_N_MIN};
use cafs::bench::{self, Algo, CsvSink, GridConfig, SortAlgo, DESK_MAX_N, FULL_MAX_N};
use cafs::datagen::DEFAULT_SEED_BASE;
use cafs::selftest::{self, Fault, SelftestConfig};
use cafs::SortKey;
use clap::{Args, Parser, Subcommand};

/// Low-cardinality integer sort: benchmarks, analysis, self-test.
#[derive(Parser, Debug)]
#[command(name = "cafs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time the algorithms over the (n, k) grid and write a CSV.
    Bench(BenchArgs),
    /// Bin a bench CSV by entropy and report speedups per baseline.
    Analyze(AnalyzeArgs),
    /// Run the built-in verification suites.
    Selftest(SelftestArgs),
    /// Sort a file of 64-bit integers.
    Sortfile(SortfileArgs),
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Largest array length in the grid.
    #[arg(long, default_value_t = DESK_MAX_N)]
    max_n: usize,
    /// Skip grid points with more distinct keys than this.
    #[arg(long)]
    max_k: Option<usize>,
    /// Comma-separated algorithms: cafs, stdsort, mapcount.
    #[arg(long, value_delimiter = ',', default_value = "cafs,stdsort,mapcount")]
    algos: Vec<Algo>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the full grid up to n = 3e7 (hours).
    #[arg(long, conflicts_with = "max_n")]
    full: bool,
    /// Replicates per point; the fastest is kept.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    reps: u32,
    #[arg(long, env = "CAFS_SEED", default_value_t = DEFAULT_SEED_BASE)]
    seed: u64,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Bench CSV to read.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the bins CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Baselines to compare against; defaults to every non-cafs algorithm
    /// in the input.
    #[arg(long, value_delimiter = ',')]
    baselines: Vec<String>,
    /// Crossover only considers points with n above this.
    #[arg(long, default_value_t = CROSSOVER_N_MIN)]
    n_min: usize,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, env = "CAFS_SEED", default_value_t = DEFAULT_SEED_BASE)]
    seed: u64,
    /// Points in the oracle sweep.
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Corrupt sorted outputs to check that failures are reported.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args, Debug)]
struct SortfileArgs {
    #[arg(long)]
    input: PathBuf,
    /// Destination; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Raw little-endian 8-byte words instead of decimal lines.
    #[arg(long)]
    binary: bool,
    /// Treat values as signed.
    #[arg(long)]
    signed: bool,
}

type Failure = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(a) => cmd_bench(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Selftest(a) => cmd_selftest(a),
        Command::Sortfile(a) => cmd_sortfile(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<bool, Failure> {
    let config = GridConfig {
        max_n: if args.full { FULL_MAX_N } else { args.max_n },
        max_k: args.max_k,
        reps: args.reps as usize,
        seed_base: args.seed,
    };
    let algos: Vec<&dyn SortAlgo> = args.algos.iter().map(|a| a as &dyn SortAlgo).collect();
    let mut incorrect = Vec::new();
    let mut check = |recs: &[bench::BenchRecord]| {
        for r in recs.iter().filter(|r| !r.correct) {
            incorrect.push(format!("{} at n = {}, k = {}", r.algo, r.n, r.k));
        }
    };
    match &args.out {
        Some(path) => {
            let mut sink = CsvSink::create(path)?;
            bench::run_grid(&config, &algos, |recs| {
                check(recs);
                sink.write_records(recs)
            })?;
            sink.finish()?;
        }
        None => {
            let mut sink = CsvSink::from_writer(io::stdout().lock(), "<stdout>")?;
            bench::run_grid(&config, &algos, |recs| {
                check(recs);
                sink.write_records(recs)
            })?;
            sink.finish()?;
        }
    }
    for line in &incorrect {
        eprintln!("incorrect output: {line}");
    }
    Ok(incorrect.is_empty())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<bool, Failure> {
    let records = bench::read_csv(&args.input)?;
    let baselines = if args.baselines.is_empty() { analysis::baselines_in(&records) } else { args.baselines };
    let reports = baselines
        .iter()
        .map(|b| analysis::report(&records, b, args.n_min))
        .collect::<Result<Vec<BaselineReport>, _>>()?;
    if let Some(out) = &args.out {
        analysis::write_bins_csv(&reports, out)?;
    }
    if reports.is_empty() {
        println!("no records to analyze");
    } else {
        print!("{}", analysis::summary_text(&reports, args.n_min));
    }
    Ok(true)
}

fn cmd_selftest(args: SelftestArgs) -> Result<bool, Failure> {
    let cfg = SelftestConfig {
        seed: args.seed,
        points: args.points,
        fault: args.inject_fault.then_some(Fault::CorruptOutput),
    };
    let results = selftest::run(&cfg);
    for r in &results {
        println!("{r}");
    }
    Ok(results.iter().all(|r| r.passed))
}

fn cmd_sortfile(args: SortfileArgs) -> Result<bool, Failure> {
    let raw = fs::read(&args.input).map_err(|e| format!("{}: {e}", args.input.display()))?;
    let bytes = match (args.binary, args.signed) {
        (false, false) => sort_text::<u64>(&raw, &args.input)?,
        (false, true) => sort_text::<i64>(&raw, &args.input)?,
        (true, false) => sort_binary(&raw, &args.input, u64::from_le_bytes, u64::to_le_bytes)?,
        (true, true) => sort_binary(&raw, &args.input, i64::from_le_bytes, i64::to_le_bytes)?,
    };
    match &args.output {
        Some(path) => fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))?,
        None => {
            let mut out = BufWriter::new(io::stdout().lock());
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    Ok(true)
}

fn sort_text<T>(raw: &[u8], path: &Path) -> Result<Vec<u8>, Failure>
where
    T: SortKey + std::str::FromStr + std::fmt::Display,
{
    let text = std::str::from_utf8(raw).map_err(|e| format!("{}: not UTF-8 text: {e}", path.display()))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let value = line
            .trim()
            .parse::<T>()
            .map_err(|_| format!("{}: line {}: not a 64-bit integer: {line:?}", path.display(), i + 1))?;
        values.push(value);
    }
    eprintln!("{}", cafs::cafs_sort(&mut values));
    let mut out = Vec::with_capacity(raw.len());
    for v in &values {
        writeln!(out, "{v}")?;
    }
    Ok(out)
}

fn sort_binary<T: SortKey>(
    raw: &[u8],
    path: &Path,
    decode: fn([u8; 8]) -> T,
    encode: fn(T) -> [u8; 8],
) -> Result<Vec<u8>, Failure> {
    let words = raw.chunks_exact(8);
    if !words.remainder().is_empty() {
        let offset = raw.len() - words.remainder().len();
        return Err(format!(
            "{}: offset {offset}: trailing {} bytes do not form an 8-byte word",
            path.display(),
            words.remainder().len()
        )
        .into());
    }
    let mut values: Vec<T> = words.map(|w| decode(w.try_into().expect("8-byte chunk"))).collect();
    eprintln!("{}", cafs::cafs_sort(&mut values));
    Ok(values.into_iter().flat_map(encode).collect())
}
