#ifndef LASTPC_H
#define LASTPC_H

/* Generated by cbindgen from lastpc-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Moment matrix kind selector.
 */
typedef enum LastpcKind {
  LASTPC_KIND_COVARIANCE = 0,
  LASTPC_KIND_CORRELATION = 1,
} LastpcKind;

/**
 * Status codes mirroring the CLI exit codes.
 */
typedef enum LastpcStatus {
  LASTPC_STATUS_OK = 0,
  /**
   * Null pointer or invalid UTF-8 crossing the boundary.
   */
  LASTPC_STATUS_BAD_ARGUMENT = 1,
  /**
   * Invalid input data or options.
   */
  LASTPC_STATUS_INPUT_ERROR = 2,
  /**
   * Numerical failure.
   */
  LASTPC_STATUS_NUMERICAL_ERROR = 3,
} LastpcStatus;

/**
 * Opaque discovery report handle.
 */
typedef struct LastpcReport LastpcReport;

/**
 * Opaque cases-by-variables table handle.
 */
typedef struct LastpcTable LastpcTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or NULL after a
 * success. The pointer is valid until the next library call on the
 * same thread; do not free it.
 */
const char *lastpc_last_error_message(void);

/**
 * Build a table from row-major values. `names` holds `n_vars`
 * NUL-terminated variable names; `unit_scales` may be NULL for all-1
 * scales; `values` holds `n_cases * n_vars` entries.
 */
enum LastpcStatus lastpc_table_new(const char *const *names,
                                   const double *unit_scales,
                                   uintptr_t n_vars,
                                   const double *values,
                                   uintptr_t n_cases,
                                   struct LastpcTable **out);

/**
 * The built-in solar-system table.
 */
enum LastpcStatus lastpc_table_solar(struct LastpcTable **out);

void lastpc_table_free(struct LastpcTable *table);

/**
 * Tabular discovery. `pool_quantile <= 0` selects the default 0.25;
 * `pivot_target <= 0` selects the automatic 1..=6 search.
 */
enum LastpcStatus lastpc_discover_tabular(const struct LastpcTable *table,
                                          bool log_si,
                                          enum LastpcKind kind,
                                          double pool_quantile,
                                          int32_t pivot_target,
                                          struct LastpcReport **out);

/**
 * Gridded discovery over a stack directory on disk (the format written
 * by the CLI `gen-stack` command). `lag <= 0` disables the difference
 * filter; `pair_x`/`pair_y` may be NULL to skip the beta map.
 */
enum LastpcStatus lastpc_discover_gridded_dir(const char *stack_dir,
                                              int32_t lag,
                                              const char *pair_x,
                                              const char *pair_y,
                                              double theoretical_beta,
                                              struct LastpcReport **out);

void lastpc_report_free(struct LastpcReport *report);

/**
 * Serialize a report to its canonical JSON text. The caller owns the
 * returned string and releases it with `lastpc_string_free`.
 */
enum LastpcStatus lastpc_report_to_json(const struct LastpcReport *report, char **out);

/**
 * Number of eigenvalues in the report spectrum, or 0 when absent.
 */
uintptr_t lastpc_report_n_eigenvalues(const struct LastpcReport *report);

/**
 * Copy up to `len` eigenvalues into `buf`, returning the number copied.
 */
uintptr_t lastpc_report_eigenvalues(const struct LastpcReport *report, double *buf, uintptr_t len);

void lastpc_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LASTPC_H */
