#ifndef FPFILTER_H
#define FPFILTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Underflow-protected cascade. Exact on every finite input.
 */
#define FPF_PROFILE_SAFE 0

/**
 * Cheaper first stage that assumes no underflow happens.
 */
#define FPF_PROFILE_FAST 1

typedef enum FpfStatus {
  FPF_STATUS_OK = 0,
  FPF_STATUS_NULL_POINTER = 1,
  FPF_STATUS_INVALID_ARGUMENT = 2,
  FPF_STATUS_PARSE_ERROR = 3,
  FPF_STATUS_DERIVE_ERROR = 4,
  FPF_STATUS_ARITY_MISMATCH = 5,
  FPF_STATUS_NON_FINITE = 6,
  FPF_STATUS_UNDECIDED = 7,
  FPF_STATUS_PANIC = 8,
} FpfStatus;

/**
 * A staged predicate. Opaque to C.
 */
typedef struct FpfPredicate FpfPredicate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates the default cascade of a built-in predicate (`orient2d`,
 * `incircle2d`, `orient3d`, `power_side_3d`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` valid for writes.
 */
enum FpfStatus fpf_predicate_builtin(const char *name,
                                     int32_t profile_id,
                                     struct FpfPredicate **out);

/**
 * Creates the default cascade for an expression such as
 * `(_1 - _5) * (_4 - _6) - (_2 - _6) * (_3 - _5)`.
 *
 * # Safety
 * `expr` must be a NUL-terminated string and `out` valid for writes.
 */
enum FpfStatus fpf_predicate_from_expr(const char *expr,
                                       int32_t profile_id,
                                       struct FpfPredicate **out);

/**
 * Releases a predicate. Null is ignored.
 *
 * # Safety
 * `p` must come from one of the constructors and not be freed twice.
 */
void fpf_predicate_free(struct FpfPredicate *p);

/**
 * Number of inputs, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t fpf_predicate_arity(const struct FpfPredicate *p);

/**
 * Number of stages in the cascade, or 0 for a null handle.
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t fpf_predicate_stage_count(const struct FpfPredicate *p);

/**
 * Exact sign (-1, 0 or +1) of the predicate at `inputs[0..len]`, and the
 * 1-based index of the stage that decided it. `stage` may be null.
 *
 * # Safety
 * `p` must be a live handle, `inputs` valid for `len` reads and `sign`
 * valid for a write.
 */
enum FpfStatus fpf_predicate_apply(const struct FpfPredicate *p,
                                   const double *inputs,
                                   size_t len,
                                   int32_t *sign,
                                   uint32_t *stage);

/**
 * The semi-static filter constants of an expression ending in a sum or
 * difference. `a4` is the factor the filter uses: the sign of the rounded
 * value is certified when its magnitude exceeds `a4` times the rounded
 * magnitude bound. `a3` is the intermediate constant it is derived from.
 *
 * # Safety
 * `expr` must be a NUL-terminated string; `a3` and `a4` valid for writes.
 */
enum FpfStatus fpf_derive_constants(const char *expr, bool ufp, double *a3, double *a4);

/**
 * Copies the last error message of this thread into `buf` (truncated,
 * always NUL-terminated when `cap > 0`) and returns its full length in
 * bytes without the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `cap` writes.
 */
size_t fpf_last_error_message(char *buf, size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPFILTER_H */
