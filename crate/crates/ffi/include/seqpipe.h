/* C interface to the seqpipe batching pipeline. Generated by cbindgen; do not edit. */

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of a fallible `sp_*` call.
typedef enum SpStatus {
  SP_STATUS_OK = 0,
  // An argument value was rejected (bad spec string, zero batch size).
  SP_STATUS_INVALID_ARGUMENT = 1,
  // A required pointer argument was null.
  SP_STATUS_NULL_POINTER = 2,
  // A string argument was not valid UTF-8.
  SP_STATUS_INVALID_UTF8 = 3,
  // The requested dataset is not in the registry.
  SP_STATUS_NOT_FOUND = 4,
  // A registered file's digest did not match its manifest entry.
  SP_STATUS_INTEGRITY_ERROR = 5,
  // The manifest or a data file could not be read.
  SP_STATUS_IO_ERROR = 6,
  // A file's contents did not parse under its declared format.
  SP_STATUS_FORMAT_ERROR = 7,
  // An internal invariant failed (including caught panics).
  SP_STATUS_INTERNAL_ERROR = 8,
} SpStatus;

// Length-bucketing scheme selector for [`sp_plan_fixed_bucket`].
typedef enum SpBucketScheme {
  SP_BUCKET_SCHEME_CONSTANT_WIDTH = 0,
  SP_BUCKET_SCHEME_QUANTILE = 1,
} SpBucketScheme;

// Opaque dataset handle: samples plus cached length statistics.
typedef struct SpDataset SpDataset;

// Opaque epoch-plan handle, bound to the stats of the dataset it was
// planned for so ratio queries are always in-domain.
typedef struct SpPlan SpPlan;

// Throughput measurement written by [`sp_bench_run`].
typedef struct SpBenchResult {
  uint64_t samples;
  uint64_t batches;
  // Slots occupied by pad values across all padded blocks.
  uint64_t padded_slots;
  // Total padded-block slots (rows times cols).
  uint64_t total_slots;
  double wall_ms;
  double samples_per_sec;
} SpBenchResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the calling thread's most recent failed `sp_*` call, or
// null if it succeeded. The pointer is invalidated by the thread's
// next `sp_*` call.
const char *sp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sp_version(void);

// Generates a synthetic corpus from a spec string such as
// "uniform:1:100:10000:42".
//
// # Safety
// `spec` must point to a NUL-terminated string; `out` must be a valid
// pointer to an `SpDataset*` slot.
enum SpStatus sp_dataset_synthetic(const char *spec, struct SpDataset **out);

// Loads a registered dataset after verifying its manifest digest.
//
// # Safety
// `manifest`, `name`, and `split` must point to NUL-terminated
// strings; `out` must be a valid pointer to an `SpDataset*` slot.
enum SpStatus sp_dataset_from_registry(const char *manifest,
                                       const char *name,
                                       const char *split,
                                       struct SpDataset **out);

// Number of samples; 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live handle from an `sp_dataset_*` call.
uint64_t sp_dataset_len(const struct SpDataset *dataset);

// Sum of sequence lengths over the whole corpus; 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live handle from an `sp_dataset_*` call.
uint64_t sp_dataset_total_tokens(const struct SpDataset *dataset);

// Frees a dataset handle; null is a no-op.
//
// # Safety
// `dataset` must be null or a live handle, and must not be used after
// this call.
void sp_dataset_free(struct SpDataset *dataset);

// Builds a length-bucketed epoch plan over `dataset`.
//
// # Safety
// `dataset` must be a live handle; `out` must be a valid pointer to an
// `SpPlan*` slot.
enum SpStatus sp_plan_fixed_bucket(const struct SpDataset *dataset,
                                   uint64_t num_buckets,
                                   enum SpBucketScheme scheme,
                                   uint64_t batch_size,
                                   bool shuffle,
                                   uint64_t seed,
                                   bool drop_last,
                                   struct SpPlan **out);

// Builds a shuffled fixed-size-chunk plan over `dataset`.
//
// # Safety
// `dataset` must be a live handle; `out` must be a valid pointer to an
// `SpPlan*` slot.
enum SpStatus sp_plan_random(const struct SpDataset *dataset,
                             uint64_t batch_size,
                             uint64_t seed,
                             bool drop_last,
                             struct SpPlan **out);

// Number of batches in the plan; 0 for a null handle.
//
// # Safety
// `plan` must be null or a live handle from an `sp_plan_*` call.
uint64_t sp_plan_num_batches(const struct SpPlan *plan);

// Fraction of mini-batch slots holding pad values under this plan;
// NaN for a null handle.
//
// # Safety
// `plan` must be null or a live handle from an `sp_plan_*` call.
double sp_plan_padding_ratio(const struct SpPlan *plan);

// Number of sample indices in batch `batch`; 0 if out of range or null.
//
// # Safety
// `plan` must be null or a live handle from an `sp_plan_*` call.
uint64_t sp_plan_batch_len(const struct SpPlan *plan, uint64_t batch);

// Copies batch `batch`'s sample indices into `buf` (capacity `cap`
// u64 slots). Fails with `InvalidArgument` if the batch does not
// exist or `cap` is too small.
//
// # Safety
// `plan` must be a live handle; `buf` must be valid for `cap` writes.
enum SpStatus sp_plan_batch_indices(const struct SpPlan *plan,
                                    uint64_t batch,
                                    uint64_t *buf,
                                    uint64_t cap);

// Frees a plan handle; null is a no-op.
//
// # Safety
// `plan` must be null or a live handle, and must not be used after
// this call.
void sp_plan_free(struct SpPlan *plan);

// Drains `plan` over `dataset` through the prefetching loader with
// `workers` threads, charging `per_token_cost` simulated work units
// per mini-batch slot, and writes the measurement to `result`.
//
// # Safety
// `dataset` and `plan` must be live handles created from the same
// corpus; `result` must be a valid pointer to an `SpBenchResult`.
enum SpStatus sp_bench_run(const struct SpDataset *dataset,
                           const struct SpPlan *plan,
                           uint64_t workers,
                           uint64_t per_token_cost,
                           struct SpBenchResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
