#ifndef SOLVENCY_H
#define SOLVENCY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SolvStatus {
  SOLV_STATUS_OK = 0,
  SOLV_STATUS_INVALID_ARGUMENT = 1,
  SOLV_STATUS_INVALID_VALUE = 2,
  SOLV_STATUS_PARSE_ERROR = 3,
  SOLV_STATUS_STATE_ERROR = 4,
  SOLV_STATUS_SAMPLING_ERROR = 5,
  SOLV_STATUS_INSUFFICIENT_CLASS = 6,
  SOLV_STATUS_IO_ERROR = 7,
  SOLV_STATUS_NULL_POINTER = 8,
  SOLV_STATUS_PANIC = 9,
} SolvStatus;

/**
 * Class indices used across the interface.
 */
typedef enum SolvClass {
  SOLV_CLASS_INSOLVENCY = 0,
  SOLV_CLASS_WEAK = 1,
  SOLV_CLASS_MODERATE = 2,
  SOLV_CLASS_STRONG = 3,
} SolvClass;

typedef enum SolvBalanceMode {
  SOLV_BALANCE_MODE_NONE = 0,
  SOLV_BALANCE_MODE_RESAMPLE = 1,
  SOLV_BALANCE_MODE_SMOTE = 2,
} SolvBalanceMode;

typedef struct SolvDataset SolvDataset;

typedef struct SolvModel SolvModel;

typedef struct SolvReport SolvReport;

/**
 * Optional per-fold balancing for [`solv_cross_validate`].
 */
typedef struct SolvBalance {
  enum SolvBalanceMode mode;
  double bias_to_uniform;
  double sample_size_percent;
  size_t target_counts[4];
  size_t k_neighbors;
  uint64_t seed;
} SolvBalance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread; empty after a
 * successful call. Owned by the library.
 */
const char *solv_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void solv_string_free(char *s);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SolvStatus solv_label_from_car(double car, enum SolvClass *out);

/**
 * Loads a dataset CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum SolvStatus solv_dataset_load_csv(const char *path,
                                      bool expect_labels,
                                      struct SolvDataset **out);

/**
 * Parses dataset CSV text held in memory.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum SolvStatus solv_dataset_parse_csv(const char *text,
                                       bool expect_labels,
                                       struct SolvDataset **out);

/**
 * # Safety
 * `ds` must be a live dataset handle and `path` a NUL-terminated string.
 */
enum SolvStatus solv_dataset_write_csv(const struct SolvDataset *ds, const char *path);

/**
 * # Safety
 * `ds` must be null or a handle from this library not yet freed.
 */
void solv_dataset_free(struct SolvDataset *ds);

/**
 * Number of records, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t solv_dataset_len(const struct SolvDataset *ds);

/**
 * Number of schema attributes, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t solv_dataset_attribute_count(const struct SolvDataset *ds);

/**
 * # Safety
 * `ds` must be a live dataset handle; `out` must hold 4 elements.
 */
enum SolvStatus solv_dataset_class_counts(const struct SolvDataset *ds, size_t *out);

/**
 * Synthetic dataset with the given per-class counts.
 *
 * # Safety
 * `counts` must point to 4 elements; `out` must be valid for writes.
 */
enum SolvStatus solv_generate(const size_t *counts,
                              double separation,
                              size_t n_attributes,
                              uint64_t seed,
                              struct SolvDataset **out);

/**
 * # Safety
 * `ds` must be a live dataset handle; `out` must be valid for writes.
 */
enum SolvStatus solv_resample(const struct SolvDataset *ds,
                              double bias_to_uniform,
                              double sample_size_percent,
                              uint64_t seed,
                              struct SolvDataset **out);

/**
 * # Safety
 * `ds` must be a live dataset handle; `targets` must point to 4
 * elements; `out` must be valid for writes.
 */
enum SolvStatus solv_smote(const struct SolvDataset *ds,
                           const size_t *targets,
                           size_t k_neighbors,
                           uint64_t seed,
                           struct SolvDataset **out);

/**
 * Grows and prunes a tree. `max_depth == 0` means unlimited.
 *
 * # Safety
 * `ds` must be a live dataset handle; `out` must be valid for writes.
 */
enum SolvStatus solv_model_train(const struct SolvDataset *ds,
                                 double confidence_factor,
                                 size_t min_leaf,
                                 size_t max_depth,
                                 struct SolvModel **out);

/**
 * # Safety
 * `model` must be null or a handle from this library not yet freed.
 */
void solv_model_free(struct SolvModel *model);

/**
 * Number of attributes the model expects in [`solv_model_predict`].
 *
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t solv_model_attribute_count(const struct SolvModel *model);

/**
 * Predicts one record given its schema-ordered attribute values.
 *
 * # Safety
 * `values` must point to `n_values` doubles; `out_class` must be valid for
 * writes; `out_probs` must be null or hold 4 elements.
 */
enum SolvStatus solv_model_predict(const struct SolvModel *model,
                                   const double *values,
                                   size_t n_values,
                                   enum SolvClass *out_class,
                                   double *out_probs);

/**
 * Model file text.
 *
 * # Safety
 * `model` must be a live model handle; `out` must be valid for writes.
 */
enum SolvStatus solv_model_serialize(const struct SolvModel *model, char **out);

/**
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum SolvStatus solv_model_parse(const char *text, struct SolvModel **out);

/**
 * Indented text rendering of the tree.
 *
 * # Safety
 * `model` must be a live model handle; `out` must be valid for writes.
 */
enum SolvStatus solv_model_render(const struct SolvModel *model, char **out);

/**
 * Stratified k-fold cross-validation. `balance` may be null.
 *
 * # Safety
 * `ds` must be a live dataset handle; `balance` must be null or valid;
 * `out` must be valid for writes.
 */
enum SolvStatus solv_cross_validate(const struct SolvDataset *ds,
                                    size_t folds,
                                    double confidence_factor,
                                    size_t min_leaf,
                                    const struct SolvBalance *balance,
                                    uint64_t seed,
                                    struct SolvReport **out);

/**
 * Scores a model on a labeled dataset.
 *
 * # Safety
 * `model` and `ds` must be live handles; `out` must be valid for writes.
 */
enum SolvStatus solv_evaluate(const struct SolvModel *model,
                              const struct SolvDataset *ds,
                              struct SolvReport **out);

/**
 * # Safety
 * `report` must be null or a handle from this library not yet freed.
 */
void solv_report_free(struct SolvReport *report);

/**
 * Accuracy, MAE and RMSE; any output pointer may be null.
 *
 * # Safety
 * `report` must be a live report handle.
 */
enum SolvStatus solv_report_metrics(const struct SolvReport *report,
                                    double *accuracy,
                                    double *mae,
                                    double *rmse);

/**
 * Row-major 4x4 confusion matrix (rows actual, columns predicted).
 *
 * # Safety
 * `report` must be a live report handle; `out` must hold 16 elements.
 */
enum SolvStatus solv_report_confusion(const struct SolvReport *report, size_t *out);

/**
 * The plain-text confusion table and summary.
 *
 * # Safety
 * `report` must be a live report handle; `out` must be valid for writes.
 */
enum SolvStatus solv_report_render(const struct SolvReport *report, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOLVENCY_H */
