/* C interface to the gridnum engine. Generated by cbindgen; do not edit. */

#ifndef GRIDNUM_H
#define GRIDNUM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of one evaluation, mirroring the CLI exit contract.
 */
typedef enum GnStatus {
  /**
   * Evaluation succeeded; the result line is available.
   */
  GN_STATUS_OK = 0,
  /**
   * The expression (or base) did not parse; see the diagnostic.
   */
  GN_STATUS_PARSE_ERROR = 1,
  /**
   * The expression parsed but could not be computed (say, a zero
   * divisor); see the diagnostic.
   */
  GN_STATUS_MATH_ERROR = 2,
  /**
   * Null pointer, non-UTF-8 text, or an out-of-range mode argument.
   */
  GN_STATUS_INVALID_ARGUMENT = 3,
} GnStatus;

/**
 * Trace selector for [`gn_eval`].
 */
typedef enum GnTrace {
  /**
   * Result only.
   */
  GN_TRACE_NONE = 0,
  /**
   * Human-readable move narration and final grid before the result.
   */
  GN_TRACE_TEXT = 1,
  /**
   * One JSON event object per line before the result.
   */
  GN_TRACE_JSON = 2,
} GnTrace;

/**
 * Rounding mode for chain-step decimals.
 */
typedef enum GnRounding {
  /**
   * Drop fractional digits toward zero.
   */
  GN_ROUNDING_TRUNCATE = 0,
  /**
   * Round halves away from zero.
   */
  GN_ROUNDING_HALF_UP = 1,
} GnRounding;

/**
 * Opaque evaluation outcome; create with [`gn_eval`], release with
 * [`gn_outcome_free`].
 */
typedef struct GnOutcome GnOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Evaluates one expression, such as `"55 + 150"` or
 * `"chain(425, 23; 13, 10)@2"`.
 *
 * `base` selects the numeral base (2..=36, 10 for ordinary decimal);
 * `precision` is the fractional digit count for chain-step decimals.
 * On `Ok`, `ParseError`, or `MathError` a new outcome is written to
 * `out`; the caller owns it and must release it with
 * [`gn_outcome_free`]. On `InvalidArgument` nothing is written.
 *
 * # Safety
 * `expression` must be null or a valid NUL-terminated string; `out` must
 * be null or valid for writing one pointer.
 */
enum GnStatus gn_eval(const char *expression,
                      uint32_t base,
                      enum GnTrace trace,
                      uint32_t precision,
                      enum GnRounding rounding,
                      struct GnOutcome **out);

/**
 * Status the outcome was produced with, or a negative value on null.
 *
 * # Safety
 * `outcome` must be null or a live pointer from [`gn_eval`].
 */
int32_t gn_outcome_status(const struct GnOutcome *outcome);

/**
 * Full standard output: the optional trace followed by the result line.
 * Borrowed; valid until the outcome is freed. Null on a null handle.
 *
 * # Safety
 * `outcome` must be null or a live pointer from [`gn_eval`].
 */
const char *gn_outcome_output(const struct GnOutcome *outcome);

/**
 * The bare result line: a numeral, or `q=<q> r=<r>` for a division with
 * a non-zero remainder. Empty on failed evaluations. Borrowed; null on a
 * null handle.
 *
 * # Safety
 * `outcome` must be null or a live pointer from [`gn_eval`].
 */
const char *gn_outcome_result(const struct GnOutcome *outcome);

/**
 * One-line diagnostic for failed evaluations, empty on success.
 * Borrowed; null on a null handle.
 *
 * # Safety
 * `outcome` must be null or a live pointer from [`gn_eval`].
 */
const char *gn_outcome_diagnostic(const struct GnOutcome *outcome);

/**
 * Releases an outcome. Null is a no-op. Each outcome must be freed
 * exactly once; its strings die with it.
 *
 * # Safety
 * `outcome` must be null or a pointer obtained from [`gn_eval`] that has
 * not been freed yet.
 */
void gn_outcome_free(struct GnOutcome *outcome);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gn_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRIDNUM_H */
