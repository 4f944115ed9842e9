//! Data pipeline toolkit for variable-length sequence workloads.
//!
//! The crate provides the pieces of a padding-aware batching pipeline and a
//! model metadata catalog:
//!
//! * [`dataset`]: samples, schemas, datasets, and per-sample length stats.
//! * [`batchify`]: pad/stack transforms that collate samples into dense
//!   batches with recorded valid lengths.
//! * [`sampler`]: epoch planners: length-bucketed batching that minimizes
//!   padding, plus random and sequential baselines.
//! * [`loader`]: executes an epoch plan through a batchify function with a
//!   deterministic multi-worker prefetch pipeline.
//! * [`registry`]: manifest-backed dataset registry with checksum
//!   verification, plus jsonl/plaintext ingestion and synthetic corpora.
//! * [`zoo`]: model metadata catalog with Pareto-frontier queries and
//!   scatter-plot export.
//! * [`cli`]: implementation of the `seqpipe` command-line tool.
//!
//! Everything is deterministic under explicit seeds: planning, synthetic
//! data generation, and multi-worker loading all produce bit-identical
//! results across runs, platforms, and worker counts.

pub mod batchify;
pub mod cli;
pub mod dataset;
pub mod loader;
pub mod registry;
pub mod sampler;
pub mod zoo;

pub use batchify::{
    pad, stack, Batch, BatchBlock, BatchifyError, BatchifyFn, FieldTransform, PadSpec,
    PaddedBlock, StackedBlock,
};
pub use cli::{run, BenchReport, Cli, CliError, StrategyRow, DEFAULT_SYNTHETIC_VOCAB};
pub use dataset::{
    compute_lengths, DataError, Dataset, FieldKind, FieldValue, FixedValue, LengthStats, Sample,
    Schema, DEFAULT_KEY_FIELD,
};
pub use loader::{
    load, measure_throughput, BatchStream, LoaderConfig, LoaderError, ThroughputReport,
};
pub use registry::{
    export_jsonl, generate_synthetic, ingest_jsonl, ingest_plaintext, sha256_hex, DatasetEntry,
    FileFormat, LengthDistribution, Registry, RegistryError, SyntheticSpec,
};
pub use sampler::{
    make_buckets, padded_slots, padding_ratio, plan_fixed_bucket, plan_random, total_slots,
    BucketRange, BucketScheme, BucketSpec, EpochPlan, SamplerError, BATCH_ORDER_STREAM,
};

pub use zoo::{
    catalog_load, export_scatter, filter_task, pareto_frontier, scatter_rows, seed_catalog,
    ModelRecord, ParetoQuery, ScatterRow, Source, ZooError, DEFAULT_MARKER_AREA,
    MARKER_AREA_PER_BYTE,
};
