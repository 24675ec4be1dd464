#ifndef LOGPLACE_H
#define LOGPLACE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LpStatus {
  LP_STATUS_OK = 0,
  LP_STATUS_NULL_ARGUMENT = 1,
  LP_STATUS_INVALID_UTF8 = 2,
  LP_STATUS_CONFIG = 3,
  LP_STATUS_IO = 4,
  LP_STATUS_PARSE = 5,
  LP_STATUS_SCHEMA_MISMATCH = 6,
  LP_STATUS_MALFORMED = 7,
  LP_STATUS_DATA = 8,
  LP_STATUS_TRAINING = 9,
  LP_STATUS_OUT_OF_RANGE = 10,
  LP_STATUS_INTERNAL = 11,
} LpStatus;

/**
 * A labelled feature table.
 */
typedef struct LpDataset LpDataset;

/**
 * A trained classifier.
 */
typedef struct LpModel LpModel;

typedef struct LpRemoval {
  size_t methods;
  size_t logged_methods;
  size_t logs_before;
  size_t logs_after;
  size_t guards_removed;
} LpRemoval;

typedef struct LpScores {
  uint64_t tp;
  uint64_t fp;
  uint64_t tn;
  uint64_t fn_;
  double balanced_accuracy;
  double precision;
  double recall;
} LpScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *lp_last_error(void);

const char *lp_version(void);

/**
 * Number of values in one feature row.
 */
size_t lp_feature_count(void);

/**
 * Copy the NUL-terminated feature schema hash into `buf`.
 *
 * # Safety
 * `buf` must point to at least `len` writable bytes.
 */
enum LpStatus lp_schema_hash(char *buf, size_t len);

/**
 * Read a dataset CSV. `expected_schema` may be null to skip the check.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum LpStatus lp_dataset_read(const char *path,
                              const char *expected_schema,
                              struct LpDataset **out);

/**
 * Remove logs from one Java source and extract its labelled feature rows.
 * `report` may be null.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum LpStatus lp_extract_source(const char *path,
                                const char *source,
                                bool strict_log_regex,
                                struct LpDataset **out,
                                struct LpRemoval *report);

/**
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t lp_dataset_len(const struct LpDataset *ds);

/**
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t lp_dataset_positives(const struct LpDataset *ds);

/**
 * Copy row `index` into `values` (`lp_feature_count()` doubles) and its
 * label into `label`. Either output may be null.
 *
 * # Safety
 * `ds` must be a live handle; `values` must hold `lp_feature_count()`
 * doubles when non-null.
 */
enum LpStatus lp_dataset_row(const struct LpDataset *ds, size_t index, double *values, bool *label);

/**
 * Identity of row `index` as `file::class::signature`, or null when out of
 * range. The string lives as long as the dataset.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
const char *lp_dataset_row_id(const struct LpDataset *ds, size_t index);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void lp_dataset_free(struct LpDataset *ds);

/**
 * Load a model artifact, rejecting one trained on another feature schema.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum LpStatus lp_model_load(const char *path, struct LpModel **out);

/**
 * Score one feature row. `score` (probability of logging) and `label` may
 * be null.
 *
 * # Safety
 * `model` must be a live handle; `values` must hold `len` doubles.
 */
enum LpStatus lp_model_predict_row(const struct LpModel *model,
                                   const double *values,
                                   size_t len,
                                   double *score,
                                   bool *label);

/**
 * Confusion matrix and scores of `model` on `ds`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum LpStatus lp_model_evaluate(const struct LpModel *model,
                                const struct LpDataset *ds,
                                struct LpScores *out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void lp_model_free(struct LpModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGPLACE_H */
