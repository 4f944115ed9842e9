//! Executes an epoch plan against a dataset through a batchify function,
//! with optional parallel prefetching and deterministic output order.
//!
//! Batch `j` of the stream always equals `batchify(fn, plan.batches[j])`,
//! bit for bit, whatever `num_workers` is. Workers claim plan positions
//! from a shared counter but may only run while their position lies
//! within a sliding window of `prefetch_depth` batches ahead of the
//! consumer, so at most `prefetch_depth` completed batches are ever
//! buffered; the consumer releases the window one position at a time as
//! it delivers batches in plan order from a reordering buffer.
//!
//! Failures are never swallowed: an out-of-range index or a worker panic
//! arrives as an error item at the failed batch's stream position, and
//! the stream continues with the following batches.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::batchify::{batchify, Batch, BatchifyError, BatchifyFn};
use crate::dataset::Dataset;
use crate::sampler::EpochPlan;

/// Errors from loading; positioned variants name the plan batch they
/// occurred in.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoaderError {
    #[error("invalid loader config: {0}")]
    Config(&'static str),
    #[error("batchify fn incompatible with dataset schema: {0}")]
    Incompatible(#[source] BatchifyError),
    #[error("batch {batch}: index {index} out of range for dataset of length {len}")]
    Data { batch: usize, index: usize, len: usize },
    #[error("batch {batch}: {source}")]
    Collate {
        batch: usize,
        #[source]
        source: BatchifyError,
    },
    #[error("batch {batch}: worker panicked: {detail}")]
    Worker { batch: usize, detail: String },
}

/// Loader parallelism settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoaderConfig {
    /// Worker threads; 0 computes batches synchronously in the caller.
    pub num_workers: usize,
    /// Completed batches that may be buffered ahead of the consumer;
    /// None picks `max(2, 2 * num_workers)`.
    pub prefetch_depth: Option<usize>,
}

impl LoaderConfig {
    pub fn with_workers(num_workers: usize) -> Self {
        Self { num_workers, prefetch_depth: None }
    }

    /// The buffering bound actually applied.
    pub fn effective_prefetch_depth(&self) -> Result<usize, LoaderError> {
        match self.prefetch_depth {
            Some(0) => Err(LoaderError::Config("prefetch_depth must be at least 1")),
            Some(d) => Ok(d),
            None => Ok((2 * self.num_workers).max(2)),
        }
    }
}

fn compute_batch(
    dataset: &Dataset,
    plan: &EpochPlan,
    f: &BatchifyFn,
    pos: usize,
) -> Result<Batch, LoaderError> {
    let indices = &plan.batches()[pos];
    let mut samples = Vec::with_capacity(indices.len());
    for &index in indices {
        samples.push(dataset.get(index).ok_or(LoaderError::Data {
            batch: pos,
            index,
            len: dataset.len(),
        })?);
    }
    batchify(f, &samples).map_err(|source| LoaderError::Collate { batch: pos, source })
}

struct WindowState {
    delivered: usize,
    cancelled: bool,
}

struct Shared {
    dataset: Arc<Dataset>,
    plan: Arc<EpochPlan>,
    f: Arc<BatchifyFn>,
    next_pos: AtomicUsize,
    window: Mutex<WindowState>,
    window_moved: Condvar,
    depth: usize,
    buffered: AtomicUsize,
    high_water: AtomicUsize,
}

fn panic_detail(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

fn worker_loop(shared: &Shared, tx: &mpsc::Sender<(usize, Result<Batch, LoaderError>)>) {
    let total = shared.plan.num_batches();
    loop {
        let pos = shared.next_pos.fetch_add(1, Ordering::Relaxed);
        if pos >= total {
            return;
        }
        {
            let mut state = shared.window.lock().expect("window lock poisoned");
            while !state.cancelled && pos >= state.delivered + shared.depth {
                state = shared
                    .window_moved
                    .wait(state)
                    .expect("window lock poisoned");
            }
            if state.cancelled {
                return;
            }
        }
        let result = panic::catch_unwind(AssertUnwindSafe(|| {
            compute_batch(&shared.dataset, &shared.plan, &shared.f, pos)
        }))
        .unwrap_or_else(|payload| {
            Err(LoaderError::Worker { batch: pos, detail: panic_detail(payload) })
        });

        let buffered = shared.buffered.fetch_add(1, Ordering::SeqCst) + 1;
        shared.high_water.fetch_max(buffered, Ordering::SeqCst);
        if tx.send((pos, result)).is_err() {
            return;
        }
    }
}

struct Pool {
    shared: Arc<Shared>,
    rx: mpsc::Receiver<(usize, Result<Batch, LoaderError>)>,
    reorder: BTreeMap<usize, Result<Batch, LoaderError>>,
    handles: Vec<JoinHandle<()>>,
}

impl Pool {
    fn recv_in_order(&mut self, pos: usize) -> Result<Batch, LoaderError> {
        loop {
            if let Some(item) = self.reorder.remove(&pos) {
                self.shared.buffered.fetch_sub(1, Ordering::SeqCst);
                let mut state = self.shared.window.lock().expect("window lock poisoned");
                state.delivered += 1;
                self.shared.window_moved.notify_all();
                drop(state);
                return item;
            }
            match self.rx.recv() {
                Ok((got, item)) => {
                    self.reorder.insert(got, item);
                }
                Err(_) => {
                    // All workers exited without producing this position;
                    // only reachable if a worker was torn down mid-epoch.
                    return Err(LoaderError::Worker {
                        batch: pos,
                        detail: "worker pool shut down before producing this batch".into(),
                    });
                }
            }
        }
    }
}

impl Drop for Pool {
    fn drop(&mut self) {
        {
            let mut state = self.shared.window.lock().expect("window lock poisoned");
            state.cancelled = true;
            self.shared.window_moved.notify_all();
        }
        for handle in self.handles.drain(..) {
            let _ = handle.join();
        }
    }
}

enum Inner {
    Sync {
        dataset: Arc<Dataset>,
        plan: Arc<EpochPlan>,
        f: Arc<BatchifyFn>,
    },
    Pool(Pool),
}

/// Ordered, finite, single-consumer stream of collated batches.
///
/// Yields exactly one item per plan batch, in plan order: `Ok` with the
/// collated batch, or `Err` positioned at the batch that failed. The
/// stream keeps going after an error item.
pub struct BatchStream {
    total: usize,
    next: usize,
    inner: Inner,
}

impl std::fmt::Debug for BatchStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BatchStream")
            .field("total", &self.total)
            .field("next", &self.next)
            .field("pooled", &matches!(self.inner, Inner::Pool(_)))
            .finish()
    }
}

impl BatchStream {
    /// Number of plan batches this stream yields items for.
    pub fn len_batches(&self) -> usize {
        self.total
    }

    /// Highest number of completed-but-undelivered batches observed so
    /// far; never exceeds the effective prefetch depth. Always 0 on the
    /// synchronous path, which buffers nothing.
    pub fn high_water(&self) -> usize {
        match &self.inner {
            Inner::Sync { .. } => 0,
            Inner::Pool(pool) => pool.shared.high_water.load(Ordering::SeqCst),
        }
    }
}

impl Iterator for BatchStream {
    type Item = Result<Batch, LoaderError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.total {
            return None;
        }
        let pos = self.next;
        self.next += 1;
        let item = match &mut self.inner {
            Inner::Sync { dataset, plan, f } => compute_batch(dataset, plan, f, pos),
            Inner::Pool(pool) => pool.recv_in_order(pos),
        };
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let remaining = self.total - self.next;
        (remaining, Some(remaining))
    }
}

/// Starts executing a plan and returns the batch stream.
///
/// The batchify function is validated against the dataset schema up
/// front; per-batch failures (bad index, worker panic) surface as
/// positioned error items in the stream instead.
pub fn load(
    dataset: Arc<Dataset>,
    plan: Arc<EpochPlan>,
    f: Arc<BatchifyFn>,
    cfg: &LoaderConfig,
) -> Result<BatchStream, LoaderError> {
    f.check_schema(dataset.schema())
        .map_err(LoaderError::Incompatible)?;
    let depth = cfg.effective_prefetch_depth()?;
    let total = plan.num_batches();

    if cfg.num_workers == 0 || total == 0 {
        return Ok(BatchStream {
            total,
            next: 0,
            inner: Inner::Sync { dataset, plan, f },
        });
    }

    let shared = Arc::new(Shared {
        dataset,
        plan,
        f,
        next_pos: AtomicUsize::new(0),
        window: Mutex::new(WindowState { delivered: 0, cancelled: false }),
        window_moved: Condvar::new(),
        depth,
        buffered: AtomicUsize::new(0),
        high_water: AtomicUsize::new(0),
    });
    let (tx, rx) = mpsc::channel();
    let handles = (0..cfg.num_workers)
        .map(|i| {
            let shared = Arc::clone(&shared);
            let tx = tx.clone();
            std::thread::Builder::new()
                .name(format!("loader-worker-{i}"))
                .spawn(move || worker_loop(&shared, &tx))
                .expect("spawning loader worker")
        })
        .collect();
    drop(tx);

    Ok(BatchStream {
        total,
        next: 0,
        inner: Inner::Pool(Pool { shared, rx, reorder: BTreeMap::new(), handles }),
    })
}

/// Throughput measurement over one full drain of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub samples: usize,
    pub batches: usize,
    /// Slots holding pad values, summed over every padded block.
    pub padded_slots: u64,
    /// All slots of every padded block (`rows * cols`).
    pub total_slots: u64,
    pub valid_tokens: u64,
    pub wall: Duration,
}

impl ThroughputReport {
    pub fn samples_per_sec(&self) -> f64 {
        self.samples as f64 / self.wall.as_secs_f64().max(f64::MIN_POSITIVE)
    }

    pub fn padded_slots_per_sec(&self) -> f64 {
        self.padded_slots as f64 / self.wall.as_secs_f64().max(f64::MIN_POSITIVE)
    }
}

/// Deterministic busy-work: `units` steps of integer arithmetic the
/// optimizer cannot elide.
fn spin(units: u64) {
    let mut acc = 0u64;
    for i in 0..units {
        acc = acc.wrapping_mul(6364136223846793005).wrapping_add(i);
        std::hint::black_box(acc);
    }
}

/// Drains a freshly loaded stream, charging `per_token_cost` simulated
/// work units per mini-batch slot (the padded tensor area downstream
/// compute would process), and reports wall-clock throughput plus exact
/// slot counts. The first stream error aborts the measurement.
pub fn measure_throughput(
    dataset: Arc<Dataset>,
    plan: Arc<EpochPlan>,
    f: Arc<BatchifyFn>,
    cfg: &LoaderConfig,
    per_token_cost: u64,
) -> Result<ThroughputReport, LoaderError> {
    let stream = load(dataset, plan, f, cfg)?;
    let start = Instant::now();
    let mut report = ThroughputReport {
        samples: 0,
        batches: 0,
        padded_slots: 0,
        total_slots: 0,
        valid_tokens: 0,
        wall: Duration::ZERO,
    };
    for item in stream {
        let batch = item?;
        report.samples += batch.batch_size();
        report.batches += 1;
        let total = batch.total_slots();
        let padded = batch.padded_positions();
        report.total_slots += total;
        report.padded_slots += padded;
        report.valid_tokens += total - padded;
        spin(per_token_cost * total);
    }
    report.wall = start.elapsed();
    Ok(report)
}
