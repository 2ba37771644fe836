#ifndef DSTRSORT_H
#define DSTRSORT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DsAlgo {
  DS_ALGO_MS = 0,
  DS_ALGO_PDMS = 1,
  DS_ALGO_RQUICK = 2,
  DS_ALGO_RQUICK_PLUS = 3,
} DsAlgo;

typedef enum DsAssignment {
  DS_ASSIGNMENT_GRID = 0,
  DS_ASSIGNMENT_BOUNDED = 1,
} DsAssignment;

typedef enum DsSampling {
  DS_SAMPLING_STRING = 0,
  DS_SAMPLING_CHARACTER = 1,
} DsSampling;

typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_BAD_SCHEDULE = 3,
  DS_STATUS_INFEASIBLE_SPEC = 4,
  DS_STATUS_IO = 5,
  DS_STATUS_FORMAT = 6,
  DS_STATUS_OUT_OF_RANGE = 7,
  DS_STATUS_INTERNAL = 99,
} DsStatus;

/**
 * A string collection.
 */
typedef struct DsCorpus DsCorpus;

/**
 * Outcome of one sort: output strings or permutation, plus the JSON report.
 */
typedef struct DsResult DsResult;

/**
 * Sorting options; obtain defaults from `ds_sort_options_default`.
 */
typedef struct DsSortOptions {
  enum DsAlgo algo;
  uint32_t pes;
  uint32_t levels;
  /**
   * Split factors, `schedule_len` of them; NULL derives them from `levels`.
   */
  const uint32_t *schedule;
  size_t schedule_len;
  enum DsSampling sampling;
  /**
   * 0 selects the default `2 k max(r)`.
   */
  uint32_t sampling_factor;
  enum DsAssignment assignment;
  bool compress_lcp;
  uint64_t seed;
} DsSortOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread; empty if none.
 */
const char *ds_last_error(void);

/**
 * NUL-terminated library version.
 */
const char *ds_version(void);

struct DsCorpus *ds_corpus_new(void);

/**
 * # Safety
 * `corpus` must come from this library and not be used afterwards.
 */
void ds_corpus_free(struct DsCorpus *corpus);

/**
 * Appends `len` bytes; strings may not contain zero bytes.
 *
 * # Safety
 * `corpus` must be a live handle and `bytes` valid for `len` reads.
 */
enum DsStatus ds_corpus_push(struct DsCorpus *corpus, const uint8_t *bytes, size_t len);

/**
 * # Safety
 * `corpus` must be null or a live handle from this library.
 */
size_t ds_corpus_len(const struct DsCorpus *corpus);

/**
 * Borrows string `index`; the pointer stays valid while the corpus lives
 * and is not modified.
 *
 * # Safety
 * All pointers must be valid.
 */
enum DsStatus ds_corpus_get(const struct DsCorpus *corpus,
                            size_t index,
                            const uint8_t **out_bytes,
                            size_t *out_len);

/**
 * Generates `n` strings of length `len` with the given D/N ratio.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum DsStatus ds_corpus_generate(size_t n,
                                 size_t len,
                                 double dn_ratio,
                                 uint16_t sigma,
                                 uint64_t seed,
                                 struct DsCorpus **out);

/**
 * Reads a binary or newline-delimited corpus file.
 *
 * # Safety
 * `path` must be NUL-terminated, `out` valid for one write.
 */
enum DsStatus ds_corpus_read(const char *path, struct DsCorpus **out);

/**
 * Writes the corpus in binary format.
 *
 * # Safety
 * `corpus` must be live, `path` NUL-terminated.
 */
enum DsStatus ds_corpus_write(const struct DsCorpus *corpus, const char *path);

struct DsSortOptions ds_sort_options_default(void);

/**
 * Sorts `corpus` on a simulated machine and checks the result.
 *
 * # Safety
 * `corpus` and `options` must be valid, `out` valid for one write.
 */
enum DsStatus ds_sort(const struct DsCorpus *corpus,
                      const struct DsSortOptions *options,
                      struct DsResult **out);

/**
 * # Safety
 * `result` must come from this library and not be used afterwards.
 */
void ds_result_free(struct DsResult *result);

/**
 * Whether the output matched the sequential oracle.
 * # Safety
 * `result` must be null or a live handle from this library.
 */
bool ds_result_correct(const struct DsResult *result);

/**
 * Number of output strings, or permutation entries for PDMS.
 * # Safety
 * `result` must be null or a live handle from this library.
 */
size_t ds_result_len(const struct DsResult *result);

/**
 * Whether the result is a permutation (PDMS) rather than sorted strings.
 * # Safety
 * `result` must be null or a live handle from this library.
 */
bool ds_result_is_permutation(const struct DsResult *result);

/**
 * Borrows the `index`-th smallest string of a string result.
 *
 * # Safety
 * All pointers must be valid.
 */
enum DsStatus ds_result_string(const struct DsResult *result,
                               size_t index,
                               const uint8_t **out_bytes,
                               size_t *out_len);

/**
 * Borrows the rank permutation of a PDMS result: entry `i` is the input
 * index of the `i`-th smallest string.
 *
 * # Safety
 * All pointers must be valid.
 */
enum DsStatus ds_result_permutation(const struct DsResult *result,
                                    const uint64_t **out_perm,
                                    size_t *out_len);

/**
 * The run report as NUL-terminated JSON, owned by the result.
 * # Safety
 * `result` must be null or a live handle from this library.
 */
const char *ds_result_report_json(const struct DsResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSTRSORT_H */
