#ifndef INTERLAB_H
#define INTERLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum InterlabStatus {
  INTERLAB_STATUS_OK = 0,
  INTERLAB_STATUS_NULL_POINTER = 1,
  /**
   * Invalid configuration or argument (CLI exit code 2).
   */
  INTERLAB_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Invalid or unreadable data (CLI exit code 3).
   */
  INTERLAB_STATUS_DATA_ERROR = 3,
  /**
   * Numeric failure (CLI exit code 4).
   */
  INTERLAB_STATUS_NUMERIC_ERROR = 4,
  INTERLAB_STATUS_IO_ERROR = 5,
  INTERLAB_STATUS_BUFFER_TOO_SMALL = 6,
  INTERLAB_STATUS_PANIC = 7,
} InterlabStatus;

typedef enum InterlabIntervalMethod {
  INTERLAB_INTERVAL_METHOD_APPROX_CHI2 = 0,
  INTERLAB_INTERVAL_METHOD_APPROX_MORIGUCHI = 1,
  INTERLAB_INTERVAL_METHOD_APPROX_SATTERTHWAITE = 2,
  INTERLAB_INTERVAL_METHOD_BOOT_NORMAL = 3,
  INTERLAB_INTERVAL_METHOD_BOOT_PERCENTILE = 4,
  INTERLAB_INTERVAL_METHOD_BOOT_BCA = 5,
} InterlabIntervalMethod;

typedef enum InterlabIntervalFlag {
  INTERLAB_INTERVAL_FLAG_NONE = 0,
  INTERLAB_INTERVAL_FLAG_INVERTED = 1,
  INTERLAB_INTERVAL_FLAG_BCA_COUNT_CLAMPED = 2,
  INTERLAB_INTERVAL_FLAG_DEGENERATE_REPLICATES = 3,
  /**
   * The interval could not be formed; endpoints are NaN.
   */
  INTERLAB_INTERVAL_FLAG_NOT_COMPUTED = 4,
} InterlabIntervalFlag;

typedef enum InterlabScheme {
  INTERLAB_SCHEME_BOOT_I = 0,
  INTERLAB_SCHEME_BOOT_J_SINGLE = 1,
  INTERLAB_SCHEME_BOOT_J_REPEATED = 2,
  INTERLAB_SCHEME_BOOT_IJ_REPEATED = 3,
  INTERLAB_SCHEME_BOOT_IJ_SINGLE = 4,
} InterlabScheme;

typedef enum InterlabFlavor {
  INTERLAB_FLAVOR_RAW_MEAN = 0,
  INTERLAB_FLAVOR_BIAS_CORRECTED = 1,
  INTERLAB_FLAVOR_ADJUSTED = 2,
} InterlabFlavor;

typedef enum InterlabBootMethod {
  INTERLAB_BOOT_METHOD_NORMAL = 0,
  INTERLAB_BOOT_METHOD_PERCENTILE = 1,
  INTERLAB_BOOT_METHOD_BCA = 2,
} InterlabBootMethod;

/**
 * Opaque bootstrap distribution.
 */
typedef struct InterlabBootstrap InterlabBootstrap;

/**
 * Opaque balanced `k × n` dataset.
 */
typedef struct InterlabDataset InterlabDataset;

/**
 * Values for repeatability, between-laboratory and reproducibility.
 */
typedef struct InterlabTriple {
  double repeatability;
  double between_lab;
  double reproducibility;
} InterlabTriple;

typedef struct InterlabAnova {
  double ssa;
  double sse;
  double msa;
  double mse;
  size_t phi_a;
  size_t phi_e;
  struct InterlabTriple estimates;
  struct InterlabTriple standard_errors;
  /**
   * Nonzero when the reproducibility SE radicand was clamped at zero.
   */
  int32_t se_clamped;
} InterlabAnova;

typedef struct InterlabInterval {
  double lower;
  double upper;
  double alpha;
  enum InterlabIntervalMethod method;
  enum InterlabIntervalFlag flag;
} InterlabInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *interlab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *interlab_version(void);

/**
 * Copies `k * n` row-major values into a new dataset.
 */
enum InterlabStatus interlab_dataset_new(const double *values,
                                         size_t k,
                                         size_t n,
                                         struct InterlabDataset **out_dataset);

/**
 * Reads a CSV file: long format `lab,replicate,value` when `wide` is 0,
 * otherwise `lab,rep1,...,repN`.
 */
enum InterlabStatus interlab_dataset_read_csv(const char *path,
                                              int32_t wide,
                                              struct InterlabDataset **out_dataset);

/**
 * Releases a dataset. NULL is ignored.
 */
void interlab_dataset_free(struct InterlabDataset *dataset);

enum InterlabStatus interlab_dataset_dims(const struct InterlabDataset *dataset,
                                          size_t *out_k,
                                          size_t *out_n);

/**
 * Sums of squares, ANOVA estimates and their standard errors.
 */
enum InterlabStatus interlab_anova(const struct InterlabDataset *dataset,
                                   struct InterlabAnova *out_anova);

/**
 * Chi-square, Moriguchi and Satterthwaite intervals written to
 * `out_intervals[0..3]`. An interval that cannot be formed gets NaN
 * endpoints and the `NOT_COMPUTED` flag; the call still succeeds.
 */
enum InterlabStatus interlab_approx_intervals(const struct InterlabDataset *dataset,
                                              double alpha,
                                              struct InterlabInterval *out_intervals);

/**
 * Runs `m` bootstrap replicates. Replicate `t` draws from the stream
 * `(mix(seed, stream), t)`, so equal arguments give equal results.
 */
enum InterlabStatus interlab_bootstrap_run(const struct InterlabDataset *dataset,
                                           enum InterlabScheme scheme_id,
                                           size_t m,
                                           uint64_t seed,
                                           uint64_t stream,
                                           struct InterlabBootstrap **out_bootstrap);

/**
 * Releases a bootstrap distribution. NULL is ignored.
 */
void interlab_bootstrap_free(struct InterlabBootstrap *bootstrap);

/**
 * Number of replicates.
 */
enum InterlabStatus interlab_bootstrap_size(const struct InterlabBootstrap *bootstrap,
                                            size_t *out_m);

/**
 * Point estimate and standard error of one estimator flavor.
 */
enum InterlabStatus interlab_bootstrap_estimates(const struct InterlabBootstrap *bootstrap,
                                                 enum InterlabFlavor flavor_id,
                                                 struct InterlabTriple *out_estimate,
                                                 struct InterlabTriple *out_se);

/**
 * Bootstrap intervals for the three components, written to
 * `out_intervals[0..3]`. Only the raw-mean and adjusted flavors have
 * intervals.
 */
enum InterlabStatus interlab_bootstrap_interval(const struct InterlabBootstrap *bootstrap,
                                                enum InterlabFlavor flavor_id,
                                                enum InterlabBootMethod method,
                                                double alpha,
                                                struct InterlabInterval *out_intervals);

/**
 * Copies the raw replicate triples, row-major `M × 3`, into `out_values`
 * of length `capacity`. `out_written` receives `3 * M`; if `capacity` is
 * smaller nothing is copied and `BUFFER_TOO_SMALL` is returned.
 */
enum InterlabStatus interlab_bootstrap_replicates(const struct InterlabBootstrap *bootstrap,
                                                  double *out_values,
                                                  size_t capacity,
                                                  size_t *out_written);

/**
 * Standard normal quantile.
 */
enum InterlabStatus interlab_normal_quantile(double p, double *out_value);

/**
 * Chi-square quantile; `df` may be non-integer.
 */
enum InterlabStatus interlab_chi_square_quantile(double df, double p, double *out_value);

/**
 * F quantile; pass `df2 = INFINITY` for the infinite-denominator limit.
 */
enum InterlabStatus interlab_f_quantile(double df1, double df2, double p, double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INTERLAB_H */
