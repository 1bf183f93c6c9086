#ifndef DIXLAB_H
#define DIXLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DixlabFormat {
  DIXLAB_FORMAT_CSV = 0,
  DIXLAB_FORMAT_JSON = 1,
} DixlabFormat;

typedef enum DixlabStatus {
  DIXLAB_STATUS_OK = 0,
  DIXLAB_STATUS_NULL_POINTER = 1,
  DIXLAB_STATUS_INVALID_ARGUMENT = 2,
  DIXLAB_STATUS_CONFIG = 3,
  DIXLAB_STATUS_BUDGET = 4,
  DIXLAB_STATUS_NUMERICAL = 5,
  DIXLAB_STATUS_UTF8 = 6,
  DIXLAB_STATUS_PANIC = 7,
} DixlabStatus;

typedef enum DixlabTrend {
  DIXLAB_TREND_CONVERGED = 0,
  DIXLAB_TREND_OSCILLATING = 1,
  DIXLAB_TREND_UNDETERMINED = 2,
} DixlabTrend;

/**
 * Result of a config-driven run.
 */
typedef struct DixlabReport DixlabReport;

/**
 * Nonincreasing singular-value sequence.
 */
typedef struct DixlabSequence DixlabSequence;

/**
 * Summary of one estimate. `value` is NaN when `has_value` is false.
 */
typedef struct DixlabEstimate {
  double value;
  bool has_value;
  enum DixlabTrend status;
  double oscillation;
  double error_estimate;
  bool extrapolated;
} DixlabEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread; valid until the next call
 * into the library from the same thread.
 */
const char *dixlab_last_error(void);

const char *dixlab_version(void);

/**
 * Builds a sequence from `len` reals; moduli are rearranged into
 * nonincreasing order.
 *
 * # Safety
 * `values` must point to `len` readable doubles (or be null with `len == 0`);
 * `out` must be writable.
 */
enum DixlabStatus dixlab_sequence_new(const double *values,
                                      uintptr_t len,
                                      struct DixlabSequence **out);

/**
 * # Safety
 * `seq` must come from `dixlab_sequence_new` and not be used afterwards.
 */
void dixlab_sequence_free(struct DixlabSequence *seq);

/**
 * # Safety
 * `seq` must be a live handle or null.
 */
uintptr_t dixlab_sequence_len(const struct DixlabSequence *seq);

/**
 * Extrapolated log-average estimate over the given checkpoints.
 *
 * # Safety
 * `seq` must be live, `checkpoints` must hold `n` values, `out` writable.
 */
enum DixlabStatus dixlab_dixmier_estimate(const struct DixlabSequence *seq,
                                          const uint64_t *checkpoints,
                                          uintptr_t n,
                                          struct DixlabEstimate *out);

/**
 * Zeta-residue estimate over `k` values (s = 1 + 1/k).
 *
 * # Safety
 * As for `dixlab_dixmier_estimate`.
 */
enum DixlabStatus dixlab_zeta_residue_estimate(const struct DixlabSequence *seq,
                                               const uint64_t *ks,
                                               uintptr_t n,
                                               struct DixlabEstimate *out);

/**
 * Heat-kernel estimate over increasing times; `cesaro` selects the
 * logarithmic mean.
 *
 * # Safety
 * `seq` must be live, `times` must hold `n` values, `out` writable.
 */
enum DixlabStatus dixlab_heat_estimate(const struct DixlabSequence *seq,
                                       const double *times,
                                       uintptr_t n,
                                       double alpha,
                                       bool cesaro,
                                       struct DixlabEstimate *out);

/**
 * Parses a JSON experiment config and runs it.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` writable.
 */
enum DixlabStatus dixlab_run_config(const char *config_json, struct DixlabReport **out);

/**
 * # Safety
 * `report` must be a live handle or null.
 */
uintptr_t dixlab_report_rows(const struct DixlabReport *report);

/**
 * Process exit code the CLI would use for this report (0, 2 or 3).
 *
 * # Safety
 * `report` must be a live handle.
 */
int32_t dixlab_report_exit_code(const struct DixlabReport *report);

/**
 * Renders the report; free the string with `dixlab_string_free`.
 *
 * # Safety
 * `report` must be live and `out` writable.
 */
enum DixlabStatus dixlab_report_render(const struct DixlabReport *report,
                                       enum DixlabFormat format,
                                       char **out);

/**
 * # Safety
 * `report` must come from `dixlab_run_config` and not be used afterwards.
 */
void dixlab_report_free(struct DixlabReport *report);

/**
 * # Safety
 * `s` must come from `dixlab_report_render` and not be used afterwards.
 */
void dixlab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIXLAB_H */
