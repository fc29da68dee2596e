#ifndef SEPLR_H
#define SEPLR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Retrieval algorithm selector.
 */
typedef enum SeplrAlgorithm {
  SeplrNaive = 0,
  SeplrFagin = 1,
  SeplrThreshold = 2,
  SeplrPartial = 3,
  SeplrHalted = 4,
} SeplrAlgorithm;

/**
 * Result code for fallible calls.
 */
typedef enum SeplrStatus {
  /**
   * Success.
   */
  SeplrOk = 0,
  /**
   * A pointer was null or an argument was out of range.
   */
  SeplrInvalidArgument = 1,
  /**
   * File could not be read or written.
   */
  SeplrIo = 2,
  /**
   * Index file failed validation (magic, version or checksum).
   */
  SeplrCorrupt = 3,
  /**
   * The algorithm refuses this input (e.g. Fagin on a sparse index).
   */
  SeplrUnsupported = 4,
  /**
   * Any other error; see seplr_last_error_message.
   */
  SeplrInternal = 5,
} SeplrStatus;

/**
 * Opaque handle to a target-factor matrix.
 */
typedef struct SeplrFactors SeplrFactors;

/**
 * Opaque handle to a sorted-list index.
 */
typedef struct SeplrIndex SeplrIndex;

/**
 * Opaque handle to a top-K result set.
 */
typedef struct SeplrTopK SeplrTopK;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message of the most recent failure on this thread.
 *
 * The pointer stays valid until the next failing call on the same
 * thread. Never returns null.
 */
const char *seplr_last_error_message(void);

/**
 * Creates dense target factors from a row-major values buffer of
 * length `num_targets * num_dims`. Returns null on error.
 *
 * # Safety
 * `values` must point to `num_targets * num_dims` readable doubles.
 */
struct SeplrFactors *seplr_factors_new_dense(uintptr_t num_targets,
                                             uintptr_t num_dims,
                                             const double *values);

/**
 * Loads dense target factors from a CSV file. Returns null on error.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string.
 */
struct SeplrFactors *seplr_factors_load_dense(const char *path);

/**
 * Number of targets in a factors handle.
 *
 * # Safety
 * `factors` must be a live handle from this library.
 */
uintptr_t seplr_factors_num_targets(const struct SeplrFactors *factors);

/**
 * Number of latent dimensions in a factors handle.
 *
 * # Safety
 * `factors` must be a live handle from this library.
 */
uintptr_t seplr_factors_num_dims(const struct SeplrFactors *factors);

/**
 * Frees a factors handle. Null is a no-op.
 *
 * # Safety
 * `factors` must be null or a live handle; it must not be used after.
 */
void seplr_factors_free(struct SeplrFactors *factors);

/**
 * Builds a sorted-list index over the given factors. Never fails for
 * a live handle; returns null only if `factors` is null.
 *
 * # Safety
 * `factors` must be a live handle from this library.
 */
struct SeplrIndex *seplr_index_build(const struct SeplrFactors *factors);

/**
 * Writes an index to a file.
 *
 * # Safety
 * `index` must be a live handle; `path` a NUL-terminated UTF-8 string.
 */
enum SeplrStatus seplr_index_save(const struct SeplrIndex *index, const char *path);

/**
 * Reads an index from a file. Returns null on error (missing file,
 * corruption, version mismatch).
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string.
 */
struct SeplrIndex *seplr_index_load(const char *path);

/**
 * Number of targets covered by an index.
 *
 * # Safety
 * `index` must be a live handle from this library.
 */
uintptr_t seplr_index_num_targets(const struct SeplrIndex *index);

/**
 * Frees an index handle. Null is a no-op.
 *
 * # Safety
 * `index` must be null or a live handle; it must not be used after.
 */
void seplr_index_free(struct SeplrIndex *index);

/**
 * Runs a top-K query. On success writes a result handle to `out`.
 *
 * `budget` is only read for `SeplrHalted` (sorted-access depth limit,
 * must be >= 1). The factors handle must describe the same targets the
 * index was built from.
 *
 * # Safety
 * `index`, `factors` and `out` must be live pointers; `query` must
 * point to `query_len` readable doubles.
 */
enum SeplrStatus seplr_query(const struct SeplrIndex *index,
                             const struct SeplrFactors *factors,
                             const double *query,
                             uintptr_t query_len,
                             uintptr_t k,
                             enum SeplrAlgorithm algorithm,
                             uintptr_t budget,
                             struct SeplrTopK **out);

/**
 * Number of entries in a result (at most K, fewer if the database is
 * smaller).
 *
 * # Safety
 * `topk` must be a live handle from this library.
 */
uintptr_t seplr_topk_len(const struct SeplrTopK *topk);

/**
 * Target id at a rank (0 = best). Returns u32::MAX if out of range.
 *
 * # Safety
 * `topk` must be a live handle from this library.
 */
uint32_t seplr_topk_target(const struct SeplrTopK *topk, uintptr_t rank);

/**
 * Score at a rank (0 = best). Returns NaN if out of range.
 *
 * # Safety
 * `topk` must be a live handle from this library.
 */
double seplr_topk_score(const struct SeplrTopK *topk, uintptr_t rank);

/**
 * Whether the result is exact. Always true except for the halted
 * algorithm when the depth budget was exhausted.
 *
 * # Safety
 * `topk` must be a live handle from this library.
 */
bool seplr_topk_is_exact(const struct SeplrTopK *topk);

/**
 * Lower bound on the K-th best score (equals it when exact).
 *
 * # Safety
 * `topk` must be a live handle from this library.
 */
double seplr_topk_lower_bound(const struct SeplrTopK *topk);

/**
 * Upper bound on any unseen score (equals the lower bound when exact).
 *
 * # Safety
 * `topk` must be a live handle from this library.
 */
double seplr_topk_upper_bound(const struct SeplrTopK *topk);

/**
 * Number of full score evaluations the query performed.
 *
 * # Safety
 * `topk` must be a live handle from this library.
 */
uintptr_t seplr_topk_full_scores(const struct SeplrTopK *topk);

/**
 * Sorted-access depth the query reached.
 *
 * # Safety
 * `topk` must be a live handle from this library.
 */
uintptr_t seplr_topk_depth(const struct SeplrTopK *topk);

/**
 * Frees a result handle. Null is a no-op.
 *
 * # Safety
 * `topk` must be null or a live handle; it must not be used after.
 */
void seplr_topk_free(struct SeplrTopK *topk);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEPLR_H */
