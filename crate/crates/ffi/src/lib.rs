//! C ABI for the seqpipe pipeline, for binding from other languages.
//!
//! Conventions:
//! * Objects cross the boundary as opaque handles ([`SpDataset`],
//!   [`SpPlan`]) created and destroyed by `sp_*_new`/`sp_*_free` pairs.
//! * Fallible calls return an [`SpStatus`] code and write results
//!   through out-pointers; on failure the out-pointer is untouched and
//!   [`sp_last_error_message`] returns a thread-local description.
//! * No call unwinds across the boundary: panics become
//!   [`SpStatus::InternalError`].
//!
//! The matching header is committed at `include/seqpipe.h` and
//! regenerated by the build script whenever this file changes.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use seqpipe::batchify::BatchifyFn;
use seqpipe::dataset::{compute_lengths, Dataset, LengthStats, DEFAULT_KEY_FIELD};
use seqpipe::loader::{measure_throughput, LoaderConfig, LoaderError};
use seqpipe::registry::{generate_synthetic, Registry, RegistryError, SyntheticSpec};
use seqpipe::registry::LengthDistribution;
use seqpipe::sampler::{
    make_buckets, padding_ratio, plan_fixed_bucket, plan_random, BucketScheme, EpochPlan,
    SamplerError,
};

/// Result code of a fallible `sp_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    /// An argument value was rejected (bad spec string, zero batch size).
    InvalidArgument = 1,
    /// A required pointer argument was null.
    NullPointer = 2,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 3,
    /// The requested dataset is not in the registry.
    NotFound = 4,
    /// A registered file's digest did not match its manifest entry.
    IntegrityError = 5,
    /// The manifest or a data file could not be read.
    IoError = 6,
    /// A file's contents did not parse under its declared format.
    FormatError = 7,
    /// An internal invariant failed (including caught panics).
    InternalError = 8,
}

/// Length-bucketing scheme selector for [`sp_plan_fixed_bucket`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpBucketScheme {
    ConstantWidth = 0,
    Quantile = 1,
}

impl From<SpBucketScheme> for BucketScheme {
    fn from(s: SpBucketScheme) -> Self {
        match s {
            SpBucketScheme::ConstantWidth => BucketScheme::ConstantWidth,
            SpBucketScheme::Quantile => BucketScheme::Quantile,
        }
    }
}

/// Opaque dataset handle: samples plus cached length statistics.
pub struct SpDataset {
    dataset: Arc<Dataset>,
    stats: LengthStats,
}

/// Opaque epoch-plan handle, bound to the stats of the dataset it was
/// planned for so ratio queries are always in-domain.
pub struct SpPlan {
    plan: Arc<EpochPlan>,
    stats: LengthStats,
}

/// Throughput measurement written by [`sp_bench_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpBenchResult {
    pub samples: u64,
    pub batches: u64,
    /// Slots occupied by pad values across all padded blocks.
    pub padded_slots: u64,
    /// Total padded-block slots (rows times cols).
    pub total_slots: u64,
    pub wall_ms: f64,
    pub samples_per_sec: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(status: SpStatus, message: impl Into<String>) -> SpStatus {
    set_error(message.into());
    status
}

fn registry_status(e: &RegistryError) -> SpStatus {
    match e {
        RegistryError::NotFound { .. } => SpStatus::NotFound,
        RegistryError::Integrity { .. } => SpStatus::IntegrityError,
        RegistryError::Io { .. } => SpStatus::IoError,
        RegistryError::InvalidSpec(_) => SpStatus::InvalidArgument,
        _ => SpStatus::FormatError,
    }
}

fn sampler_status(e: &SamplerError) -> SpStatus {
    match e {
        SamplerError::InvalidArgument(_) | SamplerError::EmptyDataset => SpStatus::InvalidArgument,
        SamplerError::BucketCoverage { .. } => SpStatus::InternalError,
    }
}

fn loader_status(e: &LoaderError) -> SpStatus {
    match e {
        LoaderError::Config(_) | LoaderError::Incompatible(_) => SpStatus::InvalidArgument,
        _ => SpStatus::InternalError,
    }
}

/// Runs `body` with panics converted to `InternalError`, storing any
/// error message for [`sp_last_error_message`].
fn guarded(body: impl FnOnce() -> Result<(), (SpStatus, String)>) -> SpStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err((status, message))) => fail(status, message),
        Err(_) => fail(SpStatus::InternalError, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string valid for reads.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, (SpStatus, String)> {
    if ptr.is_null() {
        return Err((SpStatus::NullPointer, format!("{what} must not be null")));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| (SpStatus::InvalidUtf8, format!("{what} must be valid UTF-8")))
}

fn required_out<T>(ptr: *mut T, what: &str) -> Result<(), (SpStatus, String)> {
    if ptr.is_null() {
        Err((SpStatus::NullPointer, format!("{what} must not be null")))
    } else {
        Ok(())
    }
}

unsafe fn required_ref<'a, T>(
    ptr: *const T,
    what: &str,
) -> Result<&'a T, (SpStatus, String)> {
    if ptr.is_null() {
        Err((SpStatus::NullPointer, format!("{what} must not be null")))
    } else {
        Ok(unsafe { &*ptr })
    }
}

/// Parses CLI-style synthetic specs: "uniform:LO:HI:COUNT:SEED" or
/// "geometric:P:CAP:COUNT:SEED"; vocabulary size is fixed at 32768.
fn parse_spec(text: &str) -> Result<SyntheticSpec, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let invalid = || format!("invalid synthetic spec {text:?}");
    let num = |s: &str| s.parse::<usize>().map_err(|_| invalid());
    let seed = |s: &str| s.parse::<u64>().map_err(|_| invalid());
    match parts.as_slice() {
        ["uniform", lo, hi, count, sd] => Ok(SyntheticSpec {
            count: num(count)?,
            vocab_size: 32768,
            seed: seed(sd)?,
            length: LengthDistribution::Uniform { lo: num(lo)?, hi: num(hi)? },
        }),
        ["geometric", p, cap, count, sd] => Ok(SyntheticSpec {
            count: num(count)?,
            vocab_size: 32768,
            seed: seed(sd)?,
            length: LengthDistribution::Geometric {
                p: p.parse::<f64>().map_err(|_| invalid())?,
                cap: num(cap)?,
            },
        }),
        _ => Err(invalid()),
    }
}

fn wrap_dataset(dataset: Dataset) -> Result<*mut SpDataset, (SpStatus, String)> {
    let stats = compute_lengths(&dataset, DEFAULT_KEY_FIELD)
        .map_err(|e| (SpStatus::FormatError, e.to_string()))?;
    Ok(Box::into_raw(Box::new(SpDataset { dataset: Arc::new(dataset), stats })))
}

/// Message for the calling thread's most recent failed `sp_*` call, or
/// null if it succeeded. The pointer is invalidated by the thread's
/// next `sp_*` call.
#[no_mangle]
pub extern "C" fn sp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map_or(ptr::null(), |message| message.as_ptr())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Generates a synthetic corpus from a spec string such as
/// "uniform:1:100:10000:42".
///
/// # Safety
/// `spec` must point to a NUL-terminated string; `out` must be a valid
/// pointer to an `SpDataset*` slot.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_synthetic(
    spec: *const c_char,
    out: *mut *mut SpDataset,
) -> SpStatus {
    guarded(|| {
        required_out(out, "out")?;
        let text = unsafe { required_str(spec, "spec")? };
        let parsed = parse_spec(text).map_err(|m| (SpStatus::InvalidArgument, m))?;
        let dataset =
            generate_synthetic(&parsed).map_err(|e| (registry_status(&e), e.to_string()))?;
        unsafe { *out = wrap_dataset(dataset)? };
        Ok(())
    })
}

/// Loads a registered dataset after verifying its manifest digest.
///
/// # Safety
/// `manifest`, `name`, and `split` must point to NUL-terminated
/// strings; `out` must be a valid pointer to an `SpDataset*` slot.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_from_registry(
    manifest: *const c_char,
    name: *const c_char,
    split: *const c_char,
    out: *mut *mut SpDataset,
) -> SpStatus {
    guarded(|| {
        required_out(out, "out")?;
        let manifest = unsafe { required_str(manifest, "manifest")? };
        let name = unsafe { required_str(name, "name")? };
        let split = unsafe { required_str(split, "split")? };
        let registry =
            Registry::load(manifest).map_err(|e| (registry_status(&e), e.to_string()))?;
        let dataset =
            registry.get(name, split).map_err(|e| (registry_status(&e), e.to_string()))?;
        unsafe { *out = wrap_dataset(dataset)? };
        Ok(())
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle from an `sp_dataset_*` call.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_len(dataset: *const SpDataset) -> u64 {
    if dataset.is_null() {
        return 0;
    }
    unsafe { &*dataset }.dataset.len() as u64
}

/// Sum of sequence lengths over the whole corpus; 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle from an `sp_dataset_*` call.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_total_tokens(dataset: *const SpDataset) -> u64 {
    if dataset.is_null() {
        return 0;
    }
    unsafe { &*dataset }.stats.total_tokens()
}

/// Frees a dataset handle; null is a no-op.
///
/// # Safety
/// `dataset` must be null or a live handle, and must not be used after
/// this call.
#[no_mangle]
pub unsafe extern "C" fn sp_dataset_free(dataset: *mut SpDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Builds a length-bucketed epoch plan over `dataset`.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be a valid pointer to an
/// `SpPlan*` slot.
#[no_mangle]
pub unsafe extern "C" fn sp_plan_fixed_bucket(
    dataset: *const SpDataset,
    num_buckets: u64,
    scheme: SpBucketScheme,
    batch_size: u64,
    shuffle: bool,
    seed: u64,
    drop_last: bool,
    out: *mut *mut SpPlan,
) -> SpStatus {
    guarded(|| {
        required_out(out, "out")?;
        let handle = unsafe { required_ref(dataset, "dataset")? };
        let spec = make_buckets(&handle.stats, num_buckets as usize, scheme.into())
            .map_err(|e| (sampler_status(&e), e.to_string()))?;
        let plan = plan_fixed_bucket(
            &handle.stats,
            &spec,
            batch_size as usize,
            shuffle,
            seed,
            drop_last,
        )
        .map_err(|e| (sampler_status(&e), e.to_string()))?;
        let boxed = SpPlan { plan: Arc::new(plan), stats: handle.stats.clone() };
        unsafe { *out = Box::into_raw(Box::new(boxed)) };
        Ok(())
    })
}

/// Builds a shuffled fixed-size-chunk plan over `dataset`.
///
/// # Safety
/// `dataset` must be a live handle; `out` must be a valid pointer to an
/// `SpPlan*` slot.
#[no_mangle]
pub unsafe extern "C" fn sp_plan_random(
    dataset: *const SpDataset,
    batch_size: u64,
    seed: u64,
    drop_last: bool,
    out: *mut *mut SpPlan,
) -> SpStatus {
    guarded(|| {
        required_out(out, "out")?;
        let handle = unsafe { required_ref(dataset, "dataset")? };
        let plan = plan_random(handle.dataset.len(), batch_size as usize, seed, drop_last)
            .map_err(|e| (sampler_status(&e), e.to_string()))?;
        let boxed = SpPlan { plan: Arc::new(plan), stats: handle.stats.clone() };
        unsafe { *out = Box::into_raw(Box::new(boxed)) };
        Ok(())
    })
}

/// Number of batches in the plan; 0 for a null handle.
///
/// # Safety
/// `plan` must be null or a live handle from an `sp_plan_*` call.
#[no_mangle]
pub unsafe extern "C" fn sp_plan_num_batches(plan: *const SpPlan) -> u64 {
    if plan.is_null() {
        return 0;
    }
    unsafe { &*plan }.plan.num_batches() as u64
}

/// Fraction of mini-batch slots holding pad values under this plan;
/// NaN for a null handle.
///
/// # Safety
/// `plan` must be null or a live handle from an `sp_plan_*` call.
#[no_mangle]
pub unsafe extern "C" fn sp_plan_padding_ratio(plan: *const SpPlan) -> f64 {
    if plan.is_null() {
        return f64::NAN;
    }
    let handle = unsafe { &*plan };
    padding_ratio(&handle.plan, &handle.stats)
}

/// Number of sample indices in batch `batch`; 0 if out of range or null.
///
/// # Safety
/// `plan` must be null or a live handle from an `sp_plan_*` call.
#[no_mangle]
pub unsafe extern "C" fn sp_plan_batch_len(plan: *const SpPlan, batch: u64) -> u64 {
    if plan.is_null() {
        return 0;
    }
    let handle = unsafe { &*plan };
    handle.plan.batches().get(batch as usize).map_or(0, |b| b.len() as u64)
}

/// Copies batch `batch`'s sample indices into `buf` (capacity `cap`
/// u64 slots). Fails with `InvalidArgument` if the batch does not
/// exist or `cap` is too small.
///
/// # Safety
/// `plan` must be a live handle; `buf` must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn sp_plan_batch_indices(
    plan: *const SpPlan,
    batch: u64,
    buf: *mut u64,
    cap: u64,
) -> SpStatus {
    guarded(|| {
        let handle = unsafe { required_ref(plan, "plan")? };
        required_out(buf, "buf")?;
        let indices = handle.plan.batches().get(batch as usize).ok_or_else(|| {
            (
                SpStatus::InvalidArgument,
                format!("batch {batch} out of range for plan of {}", handle.plan.num_batches()),
            )
        })?;
        if (cap as usize) < indices.len() {
            return Err((
                SpStatus::InvalidArgument,
                format!("buffer holds {cap} indices but batch has {}", indices.len()),
            ));
        }
        for (i, &index) in indices.iter().enumerate() {
            unsafe { *buf.add(i) = index as u64 };
        }
        Ok(())
    })
}

/// Frees a plan handle; null is a no-op.
///
/// # Safety
/// `plan` must be null or a live handle, and must not be used after
/// this call.
#[no_mangle]
pub unsafe extern "C" fn sp_plan_free(plan: *mut SpPlan) {
    if !plan.is_null() {
        drop(unsafe { Box::from_raw(plan) });
    }
}

/// Drains `plan` over `dataset` through the prefetching loader with
/// `workers` threads, charging `per_token_cost` simulated work units
/// per mini-batch slot, and writes the measurement to `result`.
///
/// # Safety
/// `dataset` and `plan` must be live handles created from the same
/// corpus; `result` must be a valid pointer to an `SpBenchResult`.
#[no_mangle]
pub unsafe extern "C" fn sp_bench_run(
    dataset: *const SpDataset,
    plan: *const SpPlan,
    workers: u64,
    per_token_cost: u64,
    result: *mut SpBenchResult,
) -> SpStatus {
    guarded(|| {
        let ds = unsafe { required_ref(dataset, "dataset")? };
        let pl = unsafe { required_ref(plan, "plan")? };
        required_out(result, "result")?;
        let f = Arc::new(BatchifyFn::for_schema(ds.dataset.schema()));
        let cfg = LoaderConfig { num_workers: workers as usize, prefetch_depth: None };
        let report = measure_throughput(
            Arc::clone(&ds.dataset),
            Arc::clone(&pl.plan),
            f,
            &cfg,
            per_token_cost,
        )
        .map_err(|e| (loader_status(&e), e.to_string()))?;
        unsafe {
            *result = SpBenchResult {
                samples: report.samples as u64,
                batches: report.batches as u64,
                padded_slots: report.padded_slots,
                total_slots: report.total_slots,
                wall_ms: report.wall.as_secs_f64() * 1000.0,
                samples_per_sec: report.samples_per_sec(),
            };
        }
        Ok(())
    })
}
