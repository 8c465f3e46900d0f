#ifndef CONFHYP_H
#define CONFHYP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the first four match the command line exit codes.
 */
typedef enum ConfhypStatus {
  CONFHYP_STATUS_OK = 0,
  /**
   * A report was produced but some check in it failed.
   */
  CONFHYP_STATUS_CHECK_FAILED = 1,
  /**
   * Malformed input: scenario syntax, invalid field or argument.
   */
  CONFHYP_STATUS_INVALID_INPUT = 2,
  /**
   * The computation itself failed (order underflow, excluded formula, ...).
   */
  CONFHYP_STATUS_COMPUTATION = 3,
  CONFHYP_STATUS_NULL_POINTER = 4,
  CONFHYP_STATUS_INVALID_UTF8 = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  CONFHYP_STATUS_PANIC = 6,
  /**
   * The requested report key does not exist or is not numeric.
   */
  CONFHYP_STATUS_NOT_FOUND = 7,
} ConfhypStatus;

typedef enum ConfhypMode {
  /**
   * Use the mode recorded in the scenario.
   */
  CONFHYP_MODE_SCENARIO = 0,
  CONFHYP_MODE_FLOAT = 1,
  CONFHYP_MODE_EXACT = 2,
} ConfhypMode;

/**
 * Opaque report handle.
 */
typedef struct ConfhypReport ConfhypReport;

/**
 * Opaque scenario handle.
 */
typedef struct ConfhypScenario ConfhypScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *confhyp_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void confhyp_string_free(char *s);

/**
 * Parses scenario text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` a valid pointer.
 */
enum ConfhypStatus confhyp_scenario_parse(const char *text, struct ConfhypScenario **out);

/**
 * Seeded random scenario of dimension `d` and jet order `order`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ConfhypStatus confhyp_scenario_generate(size_t d,
                                             size_t order,
                                             uint64_t seed,
                                             bool exact,
                                             struct ConfhypScenario **out);

/**
 * # Safety
 * `s` must be NULL or a handle from this library, not yet freed.
 */
void confhyp_scenario_free(struct ConfhypScenario *s);

/**
 * Dimension of the scenario, or 0 for NULL.
 *
 * # Safety
 * `s` must be NULL or a live handle.
 */
size_t confhyp_scenario_dimension(const struct ConfhypScenario *s);

/**
 * Serializes the scenario in the text format accepted by
 * [`confhyp_scenario_parse`].
 *
 * # Safety
 * `s` must be a live handle; `out` a valid pointer.
 */
enum ConfhypStatus confhyp_scenario_to_text(const struct ConfhypScenario *s, char **out);

/**
 * Base-point values of the extrinsic invariants and curvature stack.
 *
 * # Safety
 * `s` must be a live handle; `out` a valid pointer.
 */
enum ConfhypStatus confhyp_summary(const struct ConfhypScenario *s,
                                   enum ConfhypMode mode,
                                   struct ConfhypReport **out);

/**
 * Identity, weight-law and reduce-to suites. `trials == 0` means the
 * default of 8 and `seed == 0` the scenario seed. Returns
 * `CheckFailed` with a report when some check fails.
 *
 * # Safety
 * `s` must be a live handle; `out` a valid pointer.
 */
enum ConfhypStatus confhyp_verify(const struct ConfhypScenario *s,
                                  enum ConfhypMode mode,
                                  size_t trials,
                                  uint64_t seed,
                                  struct ConfhypReport **out);

/**
 * Transverse-order probe of one invariant (`n`, `II`, `H`, `IIo`, `III`,
 * `IV`). A negative `max_order` probes up to the adapted jet order.
 *
 * # Safety
 * `s` must be a live handle, `invariant` a NUL-terminated string and `out` a
 * valid pointer.
 */
enum ConfhypStatus confhyp_probe(const struct ConfhypScenario *s,
                                 const char *invariant,
                                 enum ConfhypMode mode,
                                 int32_t max_order,
                                 size_t trials,
                                 uint64_t seed,
                                 struct ConfhypReport **out);

/**
 * Asymptotic-unit defining-function improver.
 *
 * # Safety
 * `s` must be a live handle; `out` a valid pointer.
 */
enum ConfhypStatus confhyp_improve(const struct ConfhypScenario *s,
                                   enum ConfhypMode mode,
                                   struct ConfhypReport **out);

/**
 * Number of leading-order candidate terms for the `m`-th conformal
 * fundamental form, or -1 when `m < 3`.
 */
int32_t confhyp_enumerate_count(uint32_t m);

/**
 * # Safety
 * `r` must be NULL or a handle from this library, not yet freed.
 */
void confhyp_report_free(struct ConfhypReport *r);

/**
 * Whether every check in the report passed; false for NULL.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
bool confhyp_report_passed(const struct ConfhypReport *r);

/**
 * The report in its text format, without timestamp fields.
 *
 * # Safety
 * `r` must be a live handle; `out` a valid pointer.
 */
enum ConfhypStatus confhyp_report_text(const struct ConfhypReport *r, char **out);

/**
 * Numeric entry `key` of the report as a double.
 *
 * # Safety
 * `r` must be a live handle, `key` a NUL-terminated string and `out` a
 * valid pointer.
 */
enum ConfhypStatus confhyp_report_value(const struct ConfhypReport *r,
                                        const char *key,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONFHYP_H */
