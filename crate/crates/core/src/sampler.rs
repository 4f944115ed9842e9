//! Epoch planners: length-bucketed batching plus a random baseline.
//!
//! A bucketed plan groups indices whose lengths fall in the same range so
//! each batch pads to a nearby maximum, cutting the padded-slot fraction
//! relative to random batching. [`padding_ratio`] measures that fraction
//! for any plan.
//!
//! Seed-splitting rule: every permutation is drawn from `ChaCha8Rng`
//! seeded with the plan seed, using a distinct stream per purpose:
//! bucket `k`'s within-bucket permutation uses stream `k`, the global
//! batch-order permutation uses stream [`BATCH_ORDER_STREAM`], and
//! [`plan_random`]'s permutation uses stream 0. A single-bucket plan
//! therefore shuffles with the same stream as the random baseline and the
//! two produce the same batch multiset for one seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::LengthStats;

/// RNG stream reserved for the global batch-order permutation.
pub const BATCH_ORDER_STREAM: u64 = u64::MAX;

/// Errors from bucket construction and epoch planning.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("cannot make buckets for an empty dataset")]
    EmptyDataset,
    #[error("length {length} of index {index} falls outside every bucket range")]
    BucketCoverage { index: usize, length: usize },
}

/// Inclusive range of sequence lengths handled by one bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketRange {
    pub low: usize,
    pub high: usize,
}

impl BucketRange {
    pub fn contains(&self, len: usize) -> bool {
        self.low <= len && len <= self.high
    }

    /// Largest possible max−min length spread inside one batch from this
    /// bucket: `high − low`.
    pub fn span(&self) -> usize {
        self.high - self.low
    }
}

/// How bucket boundaries are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketScheme {
    /// Equal-width length ranges between the observed min and max.
    ConstantWidth,
    /// Boundaries at empirical length quantiles, so populations are
    /// approximately equal.
    Quantile,
}

impl BucketScheme {
    pub fn name(&self) -> &'static str {
        match self {
            BucketScheme::ConstantWidth => "constant-width",
            BucketScheme::Quantile => "quantile",
        }
    }
}

/// Bucket boundaries for one dataset: disjoint, sorted, and jointly
/// covering every observed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketSpec {
    boundaries: Vec<BucketRange>,
    scheme: BucketScheme,
    num_buckets_requested: usize,
}

impl BucketSpec {
    pub fn boundaries(&self) -> &[BucketRange] {
        &self.boundaries
    }

    pub fn scheme(&self) -> BucketScheme {
        self.scheme
    }

    /// Requested bucket count; `boundaries().len()` may be smaller after
    /// empty buckets are dropped.
    pub fn num_buckets_requested(&self) -> usize {
        self.num_buckets_requested
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    /// Index of the unique bucket whose range contains `len`.
    pub fn bucket_of(&self, len: usize) -> Option<usize> {
        self.boundaries
            .binary_search_by(|r| {
                if len < r.low {
                    std::cmp::Ordering::Greater
                } else if len > r.high {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .ok()
    }
}

/// The complete ordered list of index-batches for one pass over a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochPlan {
    batches: Vec<Vec<usize>>,
    seed: u64,
    drop_last: bool,
}

impl EpochPlan {
    /// Wraps an explicit batch list as a plan. Every batch must be
    /// non-empty; indices are not range-checked here (the consumer of the
    /// plan validates them against its dataset).
    pub fn from_batches(
        batches: Vec<Vec<usize>>,
        seed: u64,
        drop_last: bool,
    ) -> Result<Self, SamplerError> {
        if batches.iter().any(Vec::is_empty) {
            return Err(SamplerError::InvalidArgument("batches must be non-empty"));
        }
        Ok(Self { batches, seed, drop_last })
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn drop_last(&self) -> bool {
        self.drop_last
    }

    /// Total number of indices across all batches.
    pub fn num_indices(&self) -> usize {
        self.batches.iter().map(Vec::len).sum()
    }

    /// Line-oriented text form: one batch per line, space-separated
    /// indices. Stable across platforms for golden-file comparison.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for batch in &self.batches {
            let line: Vec<String> = batch.iter().map(usize::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Builds bucket boundaries from observed lengths.
///
/// Constant-width: `width = ceil((max − min + 1) / num_buckets)`; bucket
/// `k` covers `[min + k·width, min + (k+1)·width − 1]` with the last
/// bucket clipped to `max`. Quantile: the upper bound of bucket `k` is
/// the `((k+1)·N / num_buckets)`-th smallest length, so populations are
/// approximately equal. Under both schemes, buckets that would hold zero
/// indices are dropped, so every returned range contains at least one
/// observed length and every observed length falls in exactly one range.
pub fn make_buckets(
    stats: &LengthStats,
    num_buckets: usize,
    scheme: BucketScheme,
) -> Result<BucketSpec, SamplerError> {
    if num_buckets < 1 {
        return Err(SamplerError::InvalidArgument("num_buckets must be at least 1"));
    }
    if stats.is_empty() {
        return Err(SamplerError::EmptyDataset);
    }
    let min = stats.min();
    let max = stats.max();

    let boundaries = match scheme {
        BucketScheme::ConstantWidth => {
            let width = (max - min + 1).div_ceil(num_buckets);
            let mut ranges = Vec::new();
            for k in 0..num_buckets {
                let low = min + k * width;
                if low > max {
                    break;
                }
                let high = (min + (k + 1) * width - 1).min(max);
                let populated = stats
                    .histogram()
                    .range(low..=high)
                    .any(|(_, &count)| count > 0);
                if populated {
                    ranges.push(BucketRange { low, high });
                }
            }
            ranges
        }
        BucketScheme::Quantile => {
            let mut sorted: Vec<usize> = stats.lengths().to_vec();
            sorted.sort_unstable();
            let n = sorted.len();
            let mut ranges: Vec<BucketRange> = Vec::new();
            let mut low = min;
            for k in 0..num_buckets {
                let cumulative = (k + 1) * n / num_buckets;
                if cumulative == 0 {
                    continue;
                }
                let high = sorted[cumulative - 1];
                if high >= low {
                    ranges.push(BucketRange { low, high });
                    low = high + 1;
                }
            }
            ranges
        }
    };

    Ok(BucketSpec { boundaries, scheme, num_buckets_requested: num_buckets })
}

fn chunk(indices: Vec<usize>, batch_size: usize, drop_last: bool) -> Vec<Vec<usize>> {
    let mut batches: Vec<Vec<usize>> = indices
        .chunks(batch_size)
        .map(<[usize]>::to_vec)
        .collect();
    if drop_last {
        if let Some(last) = batches.last() {
            if last.len() < batch_size {
                batches.pop();
            }
        }
    }
    batches
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Plans one epoch of length-bucketed batches.
///
/// Each index joins the unique bucket containing its length; within each
/// bucket, indices are chunked into batches of `batch_size` (final short
/// chunk kept unless `drop_last`). With `shuffle` the within-bucket index
/// order and the global batch order are both permuted, deterministically
/// from `seed` per the module-level seed-splitting rule; without it,
/// indices ascend within buckets and batches follow bucket order.
pub fn plan_fixed_bucket(
    stats: &LengthStats,
    spec: &BucketSpec,
    batch_size: usize,
    shuffle: bool,
    seed: u64,
    drop_last: bool,
) -> Result<EpochPlan, SamplerError> {
    if batch_size < 1 {
        return Err(SamplerError::InvalidArgument("batch_size must be at least 1"));
    }

    let mut bucket_indices: Vec<Vec<usize>> = vec![Vec::new(); spec.len()];
    for (index, &length) in stats.lengths().iter().enumerate() {
        match spec.bucket_of(length) {
            Some(k) => bucket_indices[k].push(index),
            None => return Err(SamplerError::BucketCoverage { index, length }),
        }
    }

    let mut batches: Vec<Vec<usize>> = Vec::new();
    for (k, mut indices) in bucket_indices.into_iter().enumerate() {
        if shuffle {
            indices.shuffle(&mut stream_rng(seed, k as u64));
        }
        batches.extend(chunk(indices, batch_size, drop_last));
    }
    if shuffle {
        batches.shuffle(&mut stream_rng(seed, BATCH_ORDER_STREAM));
    }

    Ok(EpochPlan { batches, seed, drop_last })
}

/// Plans one epoch of uniformly shuffled batches: a seeded permutation of
/// `0..n` chunked into consecutive batches. The baseline the bucketed
/// planner is measured against.
pub fn plan_random(
    n: usize,
    batch_size: usize,
    seed: u64,
    drop_last: bool,
) -> Result<EpochPlan, SamplerError> {
    if n < 1 {
        return Err(SamplerError::InvalidArgument("n must be at least 1"));
    }
    if batch_size < 1 {
        return Err(SamplerError::InvalidArgument("batch_size must be at least 1"));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut stream_rng(seed, 0));
    Ok(EpochPlan { batches: chunk(indices, batch_size, drop_last), seed, drop_last })
}

/// Total mini-batch slots the plan allocates: Σ over batches of
/// `batch_len · max_length_in_batch`.
///
/// Panics if a plan index is out of range for `stats`.
pub fn total_slots(plan: &EpochPlan, stats: &LengthStats) -> u64 {
    let lengths = stats.lengths();
    plan.batches()
        .iter()
        .map(|batch| {
            let max_len = batch.iter().map(|&i| lengths[i]).max().unwrap_or(0);
            (batch.len() * max_len) as u64
        })
        .sum()
}

/// Slots occupied by pad tokens rather than real tokens.
///
/// Panics if a plan index is out of range for `stats`.
pub fn padded_slots(plan: &EpochPlan, stats: &LengthStats) -> u64 {
    let lengths = stats.lengths();
    let valid: u64 = plan
        .batches()
        .iter()
        .flat_map(|batch| batch.iter())
        .map(|&i| lengths[i] as u64)
        .sum();
    total_slots(plan, stats) - valid
}

/// Fraction of slots occupied by padding across the epoch, in `[0, 1)`:
/// `padded_slots / total_slots`, or 0 for a plan with no slots.
///
/// Panics if a plan index is out of range for `stats`.
pub fn padding_ratio(plan: &EpochPlan, stats: &LengthStats) -> f64 {
    let total = total_slots(plan, stats);
    if total == 0 {
        return 0.0;
    }
    padded_slots(plan, stats) as f64 / total as f64
}
