//! The `seqpipe` command-line tool: bucket inspection, padding benchmark
//! comparisons, dataset info, and model-catalog queries.
//!
//! Everything printed to stdout is deterministic given flags and seeds;
//! wall-clock timings appear only in the benchmark report file. Exit
//! codes: 0 success, 1 runtime error, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batchify::BatchifyFn;
use crate::dataset::{compute_lengths, Dataset, FieldKind, LengthStats, DEFAULT_KEY_FIELD};
use crate::loader::{measure_throughput, LoaderConfig, LoaderError};
use crate::registry::{Registry, RegistryError, SyntheticSpec};
use crate::registry::LengthDistribution;
use crate::sampler::{
    make_buckets, padded_slots, padding_ratio, plan_fixed_bucket, plan_random, BucketScheme,
    SamplerError,
};
use crate::zoo::{
    catalog_load, export_scatter, filter_task, pareto_frontier, scatter_rows, seed_catalog,
    ModelRecord, ParetoQuery, ZooError,
};

/// Vocabulary size used for `--synthetic` corpora.
pub const DEFAULT_SYNTHETIC_VOCAB: u32 = 32768;

/// A command failure with its exit code class.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad request: unknown dataset, malformed spec string, invalid flag
    /// combination. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The request was well-formed but execution failed. Exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::NotFound { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<LoaderError> for CliError {
    fn from(e: LoaderError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<ZooError> for CliError {
    fn from(e: ZooError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<crate::dataset::DataError> for CliError {
    fn from(e: crate::dataset::DataError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "seqpipe",
    version,
    about = "Variable-length batching pipeline: bucket inspection, padding benchmarks, and model catalog queries"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Show bucket boundaries and populations for a corpus.
    Buckets(BucketsArgs),
    /// Compare random vs fixed-bucket batching on one corpus.
    Bench(BenchArgs),
    /// Summarize a corpus: size, schema, length stats.
    Info(InfoArgs),
    /// Query the model catalog.
    Zoo(ZooArgs),
}

/// Flags that pick the input corpus: a registered dataset or a synthetic
/// spec string.
#[derive(Debug, Args)]
struct SourceArgs {
    /// Registered dataset as NAME:SPLIT (needs --manifest).
    #[arg(long, value_name = "NAME:SPLIT")]
    dataset: Option<String>,

    /// Registry manifest path.
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,

    /// Synthetic corpus: "uniform:LO:HI:COUNT:SEED" or
    /// "geometric:P:CAP:COUNT:SEED".
    #[arg(long, value_name = "SPEC")]
    synthetic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    ConstantWidth,
    Quantile,
}

impl From<SchemeArg> for BucketScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::ConstantWidth => BucketScheme::ConstantWidth,
            SchemeArg::Quantile => BucketScheme::Quantile,
        }
    }
}

#[derive(Debug, Args)]
struct BucketsArgs {
    #[command(flatten)]
    source: SourceArgs,

    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    num_buckets: u32,

    #[arg(long, value_enum, default_value_t = SchemeArg::ConstantWidth)]
    scheme: SchemeArg,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    source: SourceArgs,

    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    batch_size: u32,

    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    num_buckets: u32,

    #[arg(long, value_enum, default_value_t = SchemeArg::ConstantWidth)]
    scheme: SchemeArg,

    /// Seed for both strategies' shuffles.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Loader worker threads (0 = synchronous).
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// Simulated work units per mini-batch slot while draining.
    #[arg(long, default_value_t = 0)]
    per_token_cost: u64,

    /// Write the full benchmark report (with timings) to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InfoArgs {
    #[command(flatten)]
    source: SourceArgs,
}

#[derive(Debug, Args)]
struct ZooArgs {
    #[command(subcommand)]
    action: ZooAction,
}

#[derive(Debug, Args)]
struct ZooCommonArgs {
    /// Catalog file; defaults to the embedded seed catalog.
    #[arg(long, value_name = "PATH")]
    catalog: Option<PathBuf>,

    /// Restrict to one task.
    #[arg(long, value_name = "TASK")]
    task: Option<String>,
}

#[derive(Debug, Subcommand)]
enum ZooAction {
    /// Print matching catalog records.
    List {
        #[command(flatten)]
        common: ZooCommonArgs,
    },
    /// Print the Pareto frontier on (metric, throughput).
    Pareto {
        #[command(flatten)]
        common: ZooCommonArgs,

        /// Metric to maximize jointly with throughput.
        #[arg(long, default_value = "top-1 acc.")]
        metric: String,
    },
    /// Write scatter-plot data (model, accuracy, throughput, marker_area).
    Export {
        #[command(flatten)]
        common: ZooCommonArgs,

        #[arg(long, default_value = "top-1 acc.")]
        metric: String,

        /// Output CSV path.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
}

/// One strategy's benchmark results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub strategy: String,
    pub num_buckets: usize,
    pub batch_size: usize,
    pub padding_ratio: f64,
    pub padded_slots: u64,
    pub total_slots: u64,
    pub samples_per_sec: f64,
    pub wall_ms: f64,
}

/// The benchmark report written by `bench --out`; the only place
/// wall-clock numbers appear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    /// Corpus id: "name:split" or the synthetic spec string.
    pub corpus: String,
    pub seed: u64,
    pub scheme: String,
    pub workers: usize,
    pub per_token_cost: u64,
    pub strategies: Vec<StrategyRow>,
    /// Relative padding reduction of fixed-bucket vs random:
    /// (random - bucketed) / random, or 0 when random has no padding.
    pub padding_reduction: f64,
}

fn parse_synthetic_spec(spec: &str) -> Result<SyntheticSpec, CliError> {
    let usage = || {
        CliError::Usage(format!(
            "invalid synthetic spec {spec:?}: expected uniform:LO:HI:COUNT:SEED or geometric:P:CAP:COUNT:SEED"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let parse_num = |s: &str| s.parse::<usize>().map_err(|_| usage());
    let parse_seed = |s: &str| s.parse::<u64>().map_err(|_| usage());
    match parts.as_slice() {
        ["uniform", lo, hi, count, seed] => Ok(SyntheticSpec {
            count: parse_num(count)?,
            vocab_size: DEFAULT_SYNTHETIC_VOCAB,
            seed: parse_seed(seed)?,
            length: LengthDistribution::Uniform { lo: parse_num(lo)?, hi: parse_num(hi)? },
        }),
        ["geometric", p, cap, count, seed] => Ok(SyntheticSpec {
            count: parse_num(count)?,
            vocab_size: DEFAULT_SYNTHETIC_VOCAB,
            seed: parse_seed(seed)?,
            length: LengthDistribution::Geometric {
                p: p.parse::<f64>().map_err(|_| usage())?,
                cap: parse_num(cap)?,
            },
        }),
        _ => Err(usage()),
    }
}

/// Resolves the corpus named by `--dataset`/`--synthetic` flags to a
/// dataset plus a stable corpus id for report stamping.
fn resolve_source(source: &SourceArgs) -> Result<(Arc<Dataset>, String), CliError> {
    match (&source.dataset, &source.synthetic) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "--dataset and --synthetic are mutually exclusive".into(),
        )),
        (None, None) => Err(CliError::Usage(
            "one of --dataset or --synthetic is required".into(),
        )),
        (Some(name_split), None) => {
            let manifest = source.manifest.as_ref().ok_or_else(|| {
                CliError::Usage("--dataset requires --manifest".into())
            })?;
            let (name, split) = name_split.split_once(':').ok_or_else(|| {
                CliError::Usage(format!(
                    "invalid dataset {name_split:?}: expected NAME:SPLIT"
                ))
            })?;
            let registry = Registry::load(manifest)?;
            let dataset = registry.get(name, split)?;
            Ok((Arc::new(dataset), name_split.clone()))
        }
        (None, Some(spec_str)) => {
            let spec = parse_synthetic_spec(spec_str)?;
            let dataset = crate::registry::generate_synthetic(&spec)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok((Arc::new(dataset), spec_str.clone()))
        }
    }
}

#[derive(Clone, Copy)]
enum Align {
    Left,
    Right,
}

/// Renders an aligned text table: two spaces between columns, no
/// trailing whitespace, byte-stable for golden comparison.
fn render_table(headers: &[&str], rows: &[Vec<String>], align: &[Align]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let emit = |cells: Vec<String>, out: &mut String| {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            match align[i] {
                Align::Left => write!(line, "{cell:<width$}", width = widths[i]),
                Align::Right => write!(line, "{cell:>width$}", width = widths[i]),
            }
            .expect("writing to a String cannot fail");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    };
    emit(headers.iter().map(|h| (*h).to_string()).collect(), &mut out);
    for row in rows {
        emit(row.clone(), &mut out);
    }
    out
}

fn stats_for(dataset: &Dataset) -> Result<LengthStats, CliError> {
    Ok(compute_lengths(dataset, DEFAULT_KEY_FIELD)?)
}

fn cmd_buckets(args: &BucketsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (dataset, corpus) = resolve_source(&args.source)?;
    let stats = stats_for(&dataset)?;
    let scheme: BucketScheme = args.scheme.into();
    let spec = make_buckets(&stats, args.num_buckets as usize, scheme)?;

    writeln!(out, "corpus: {corpus}")?;
    writeln!(out, "scheme: {}", scheme.name())?;
    writeln!(out)?;

    let n = stats.len();
    let rows: Vec<Vec<String>> = spec
        .boundaries()
        .iter()
        .enumerate()
        .map(|(k, range)| {
            let population: usize = stats
                .histogram()
                .range(range.low..=range.high)
                .map(|(_, &count)| count)
                .sum();
            vec![
                k.to_string(),
                format!("[{}, {}]", range.low, range.high),
                population.to_string(),
                format!("{:.1}%", population as f64 * 100.0 / n as f64),
            ]
        })
        .collect();
    let table = render_table(
        &["bucket", "range", "population", "share"],
        &rows,
        &[Align::Right, Align::Left, Align::Right, Align::Right],
    );
    out.write_all(table.as_bytes())?;
    writeln!(out)?;
    writeln!(out, "total: {} samples, {} buckets", n, spec.len())?;
    Ok(())
}

/// Writes a file all-or-nothing: the content lands under a temporary
/// name and is renamed into place only once fully written.
fn write_file_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    let result = fs::write(&tmp, contents).and_then(|()| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (dataset, corpus) = resolve_source(&args.source)?;
    let stats = stats_for(&dataset)?;
    let scheme: BucketScheme = args.scheme.into();
    let batch_size = args.batch_size as usize;
    let f = Arc::new(BatchifyFn::for_schema(dataset.schema()));
    let cfg = LoaderConfig { num_workers: args.workers, prefetch_depth: None };

    let random_plan = Arc::new(plan_random(dataset.len(), batch_size, args.seed, false)?);
    let spec = make_buckets(&stats, args.num_buckets as usize, scheme)?;
    let bucket_plan =
        Arc::new(plan_fixed_bucket(&stats, &spec, batch_size, true, args.seed, false)?);

    let mut strategies = Vec::new();
    for (strategy, plan, num_buckets) in [
        ("random", &random_plan, 1),
        ("fixed-bucket", &bucket_plan, spec.len()),
    ] {
        let report = measure_throughput(
            Arc::clone(&dataset),
            Arc::clone(plan),
            Arc::clone(&f),
            &cfg,
            args.per_token_cost,
        )?;
        debug_assert_eq!(report.padded_slots, padded_slots(plan, &stats));
        strategies.push(StrategyRow {
            strategy: strategy.to_string(),
            num_buckets,
            batch_size,
            padding_ratio: padding_ratio(plan, &stats),
            padded_slots: report.padded_slots,
            total_slots: report.total_slots,
            samples_per_sec: report.samples_per_sec(),
            wall_ms: report.wall.as_secs_f64() * 1000.0,
        });
    }

    let random_ratio = strategies[0].padding_ratio;
    let bucketed_ratio = strategies[1].padding_ratio;
    let padding_reduction = if random_ratio > 0.0 {
        (random_ratio - bucketed_ratio) / random_ratio
    } else {
        0.0
    };

    writeln!(out, "corpus: {corpus}")?;
    writeln!(out, "seed: {}", args.seed)?;
    writeln!(out, "scheme: {}", scheme.name())?;
    writeln!(out)?;
    let rows: Vec<Vec<String>> = strategies
        .iter()
        .map(|s| {
            vec![
                s.strategy.clone(),
                s.num_buckets.to_string(),
                s.batch_size.to_string(),
                format!("{:.6}", s.padding_ratio),
                s.padded_slots.to_string(),
                s.total_slots.to_string(),
            ]
        })
        .collect();
    let table = render_table(
        &["strategy", "num_buckets", "batch_size", "padding_ratio", "padded_slots", "total_slots"],
        &rows,
        &[Align::Left, Align::Right, Align::Right, Align::Right, Align::Right, Align::Right],
    );
    out.write_all(table.as_bytes())?;
    writeln!(out)?;
    writeln!(out, "padding reduction: {:.1}% (fixed-bucket vs random)", padding_reduction * 100.0)?;

    if let Some(path) = &args.out {
        let report = BenchReport {
            corpus,
            seed: args.seed,
            scheme: scheme.name().to_string(),
            workers: args.workers,
            per_token_cost: args.per_token_cost,
            strategies,
            padding_reduction,
        };
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        write_file_atomic(path, &(json + "\n"))?;
    }
    Ok(())
}

fn cmd_info(args: &InfoArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (dataset, corpus) = resolve_source(&args.source)?;
    let schema: Vec<&str> = dataset
        .schema()
        .fields()
        .iter()
        .map(|k| match k {
            FieldKind::VarSeq => "varseq",
            FieldKind::Fixed { .. } => "fixed",
        })
        .collect();
    writeln!(out, "corpus: {corpus}")?;
    writeln!(out, "samples: {}", dataset.len())?;
    writeln!(out, "schema: {}", schema.join(", "))?;
    if dataset.is_empty() {
        return Ok(());
    }
    let stats = stats_for(&dataset)?;
    let mean = stats.total_tokens() as f64 / stats.len() as f64;
    writeln!(
        out,
        "lengths: min {}, max {}, mean {:.2}",
        stats.min(),
        stats.max(),
        mean
    )?;
    writeln!(out, "total tokens: {}", stats.total_tokens())?;
    Ok(())
}

fn load_catalog(path: Option<&Path>) -> Result<Vec<ModelRecord>, CliError> {
    match path {
        Some(p) => Ok(catalog_load(p)?),
        None => Ok(seed_catalog().to_vec()),
    }
}

fn metrics_cell(record: &ModelRecord) -> String {
    record
        .metrics
        .iter()
        .map(|(name, value)| format!("{name} {value:.1}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn write_record_table(records: &[&ModelRecord], out: &mut dyn Write) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.task.clone(),
                r.dataset.clone(),
                r.model.clone(),
                r.source.name().to_string(),
                metrics_cell(r),
            ]
        })
        .collect();
    let table = render_table(
        &["task", "dataset", "model", "source", "metrics"],
        &rows,
        &[Align::Left, Align::Left, Align::Left, Align::Left, Align::Left],
    );
    // Latency notes ride along under their record's row.
    let mut lines = table.lines().map(str::to_string).collect::<Vec<_>>();
    for (i, r) in records.iter().enumerate().rev() {
        if let Some(notes) = &r.latency_notes {
            lines.insert(i + 2, format!("    note: {notes}"));
        }
    }
    for line in lines {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn cmd_zoo(args: &ZooArgs, out: &mut dyn Write) -> Result<(), CliError> {
    match &args.action {
        ZooAction::List { common } => {
            let catalog = load_catalog(common.catalog.as_deref())?;
            let records = filter_task(&catalog, common.task.as_deref());
            write_record_table(&records, out)?;
            writeln!(out)?;
            writeln!(out, "{} records", records.len())?;
        }
        ZooAction::Pareto { common, metric } => {
            let catalog = load_catalog(common.catalog.as_deref())?;
            let mut query = ParetoQuery::new(metric.clone());
            if let Some(task) = &common.task {
                query = query.with_task(task.clone());
            }
            let frontier = pareto_frontier(&catalog, &query)?;
            let rows: Vec<Vec<String>> = frontier
                .iter()
                .map(|r| {
                    vec![
                        r.model.clone(),
                        format!("{:.1}", r.metric(metric).expect("frontier records are complete")),
                        format!("{}", r.throughput.expect("frontier records are complete")),
                        r.source.name().to_string(),
                    ]
                })
                .collect();
            let table = render_table(
                &["model", metric, "throughput", "source"],
                &rows,
                &[Align::Left, Align::Right, Align::Right, Align::Left],
            );
            out.write_all(table.as_bytes())?;
            writeln!(out)?;
            writeln!(out, "{} of {} records on the frontier", frontier.len(), {
                filter_task(&catalog, query.task.as_deref()).len()
            })?;
        }
        ZooAction::Export { common, metric, out: out_path } => {
            let catalog = load_catalog(common.catalog.as_deref())?;
            let mut query = ParetoQuery::new(metric.clone());
            if let Some(task) = &common.task {
                query = query.with_task(task.clone());
            }
            let rows = scatter_rows(&catalog, &query).len();
            let csv = export_scatter(&catalog, &query);
            write_file_atomic(out_path, &csv)?;
            writeln!(out, "exported {rows} rows")?;
        }
    }
    Ok(())
}

/// Executes a parsed command, writing its stdout to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Buckets(args) => cmd_buckets(args, out),
        Command::Bench(args) => cmd_bench(args, out),
        Command::Info(args) => cmd_info(args, out),
        Command::Zoo(args) => cmd_zoo(args, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(argv: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(argv).expect("argv parses");
        let mut buf = Vec::new();
        run(&cli, &mut buf)?;
        Ok(String::from_utf8(buf).expect("output is UTF-8"))
    }

    #[test]
    fn synthetic_spec_strings_parse() {
        let spec = parse_synthetic_spec("uniform:1:100:10000:42").unwrap();
        assert_eq!(spec.count, 10000);
        assert_eq!(spec.seed, 42);
        assert_eq!(spec.vocab_size, DEFAULT_SYNTHETIC_VOCAB);
        assert_eq!(spec.length, LengthDistribution::Uniform { lo: 1, hi: 100 });

        let spec = parse_synthetic_spec("geometric:0.1:64:500:7").unwrap();
        assert_eq!(spec.length, LengthDistribution::Geometric { p: 0.1, cap: 64 });

        for bad in ["uniform:1:100", "poisson:3:4:5:6", "uniform:a:b:c:d", ""] {
            assert!(matches!(parse_synthetic_spec(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn buckets_output_is_stable_across_runs() {
        let argv = [
            "seqpipe", "buckets",
            "--synthetic", "uniform:1:100:1000:42",
            "--num-buckets", "4",
        ];
        let first = run_cli(&argv).unwrap();
        let second = run_cli(&argv).unwrap();
        assert_eq!(first, second);
        assert!(first.contains("corpus: uniform:1:100:1000:42"), "{first}");
        assert!(first.contains("scheme: constant-width"));
        assert!(first.contains("4 buckets"));
    }

    #[test]
    fn buckets_single_length_corpus_has_one_row() {
        let text = run_cli(&[
            "seqpipe", "buckets",
            "--synthetic", "uniform:5:5:100:1",
            "--num-buckets", "3",
        ])
        .unwrap();
        assert!(text.contains("[5, 5]"));
        assert!(text.contains("100.0%"));
        assert!(text.contains("1 buckets"));
    }

    #[test]
    fn missing_source_is_usage_error() {
        let cli = Cli::try_parse_from(["seqpipe", "info"]).unwrap();
        let mut buf = Vec::new();
        match run(&cli, &mut buf) {
            Err(e @ CliError::Usage(_)) => assert_eq!(e.exit_code(), 2),
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_dataset_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("m.toml");
        fs::write(&manifest, "").unwrap();
        let cli = Cli::try_parse_from([
            "seqpipe", "info",
            "--dataset", "nope:train",
            "--manifest", manifest.to_str().unwrap(),
        ])
        .unwrap();
        let mut buf = Vec::new();
        match run(&cli, &mut buf) {
            Err(e @ CliError::Usage(_)) => {
                assert_eq!(e.exit_code(), 2);
                assert!(e.to_string().contains("not registered"));
            }
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn info_reports_length_stats() {
        let text = run_cli(&["seqpipe", "info", "--synthetic", "uniform:5:5:10:1"]).unwrap();
        assert!(text.contains("samples: 10"));
        assert!(text.contains("schema: varseq"));
        assert!(text.contains("lengths: min 5, max 5, mean 5.00"));
        assert!(text.contains("total tokens: 50"));
    }

    #[test]
    fn bench_stdout_has_no_timings_and_is_stable() {
        let argv = [
            "seqpipe", "bench",
            "--synthetic", "uniform:1:50:400:7",
            "--batch-size", "16",
            "--num-buckets", "5",
            "--seed", "7",
        ];
        let first = run_cli(&argv).unwrap();
        let second = run_cli(&argv).unwrap();
        assert_eq!(first, second, "bench stdout must be byte-stable");
        assert!(first.contains("random"));
        assert!(first.contains("fixed-bucket"));
        assert!(first.contains("padding reduction:"));
        assert!(!first.contains("samples_per_sec"));
        assert!(!first.contains("wall"));
    }

    #[test]
    fn bench_single_bucket_reports_equal_ratios() {
        let text = run_cli(&[
            "seqpipe", "bench",
            "--synthetic", "uniform:1:50:300:3",
            "--batch-size", "8",
            "--num-buckets", "1",
            "--seed", "3",
        ])
        .unwrap();
        assert!(text.contains("padding reduction: 0.0%"), "{text}");
        let ratios: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("random") || l.starts_with("fixed-bucket"))
            .map(|l| l.split_whitespace().nth(3).unwrap())
            .collect();
        assert_eq!(ratios[0], ratios[1], "{text}");
    }

    #[test]
    fn bench_worker_counts_agree_on_deterministic_fields() {
        let base = [
            "seqpipe", "bench",
            "--synthetic", "uniform:1:60:500:11",
            "--batch-size", "16",
            "--num-buckets", "6",
            "--seed", "11",
        ];
        let with_workers = |n: &str| {
            let mut argv = base.to_vec();
            argv.extend(["--workers", n]);
            run_cli(&argv).unwrap()
        };
        assert_eq!(with_workers("0"), with_workers("8"));
    }

    #[test]
    fn bench_report_file_is_complete_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        run_cli(&[
            "seqpipe", "bench",
            "--synthetic", "uniform:1:40:200:5",
            "--batch-size", "8",
            "--num-buckets", "4",
            "--seed", "5",
            "--out", path.to_str().unwrap(),
        ])
        .unwrap();
        let report: BenchReport =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(report.corpus, "uniform:1:40:200:5");
        assert_eq!(report.seed, 5);
        assert_eq!(report.strategies.len(), 2);
        for row in &report.strategies {
            assert!(row.padding_ratio >= 0.0 && row.padding_ratio < 1.0);
            assert_eq!(
                row.padded_slots,
                (row.total_slots as f64 * row.padding_ratio).round() as u64
            );
            assert!(row.wall_ms >= 0.0);
            assert!(row.samples_per_sec > 0.0);
        }
        assert!(report.padding_reduction > 0.0);
        assert!(!dir.path().join("report.json.tmp").exists());
    }

    #[test]
    fn zoo_list_prints_seed_catalog_rows() {
        let text = run_cli(&["seqpipe", "zoo", "list"]).unwrap();
        assert!(text.contains("25 records"));
        assert!(text.contains("ResNet-50"));
        assert!(text.contains("top-1 acc. 79.2"));
        assert!(text.contains("note: int8 inference reduces latency by 59.6%"));

        let filtered = run_cli(&["seqpipe", "zoo", "list", "--task", "Question Answering"]).unwrap();
        assert!(filtered.contains("4 records"));
        assert!(filtered.contains("F1 88.5"));
        assert!(filtered.contains("F1 91.0"));
        assert!(!filtered.contains("ResNet"));
    }

    #[test]
    fn zoo_pareto_on_classification_keeps_all_toolkit_rows() {
        let text = run_cli(&[
            "seqpipe", "zoo", "pareto",
            "--task", "Image Classification",
        ])
        .unwrap_err();
        // External records carry no throughput: strict objectives error.
        assert!(text.to_string().contains("missing"), "{text}");
    }

    #[test]
    fn zoo_pareto_works_on_complete_catalogs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("catalog.toml");
        let catalog = r#"
[[model]]
task = "Image Classification"
dataset = "ImageNet"
model = "A"
source = "this-toolkit"
metrics = { "top-1 acc." = 79.2 }
throughput = 1000.0

[[model]]
task = "Image Classification"
dataset = "ImageNet"
model = "B"
source = "this-toolkit"
metrics = { "top-1 acc." = 80.5 }
throughput = 800.0

[[model]]
task = "Image Classification"
dataset = "ImageNet"
model = "C"
source = "this-toolkit"
metrics = { "top-1 acc." = 76.4 }
throughput = 700.0
"#;
        fs::write(&path, catalog).unwrap();
        let text = run_cli(&[
            "seqpipe", "zoo", "pareto",
            "--catalog", path.to_str().unwrap(),
        ])
        .unwrap();
        let body: Vec<&str> = text.lines().skip(1).take(2).collect();
        assert!(body[0].starts_with('B'), "{text}");
        assert!(body[1].starts_with('A'), "{text}");
        assert!(!text.contains("\nC"), "C is dominated: {text}");
        assert!(text.contains("2 of 3 records"));
    }

    #[test]
    fn zoo_export_writes_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scatter.csv");
        let text = run_cli(&[
            "seqpipe", "zoo", "export",
            "--task", "Image Classification",
            "--out", path.to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(text, "exported 3 rows\n");
        let csv = fs::read_to_string(&path).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("model,accuracy,throughput,marker_area\n"));
    }
}
