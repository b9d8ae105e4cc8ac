#ifndef MINSUPPORT_H
#define MINSUPPORT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_INPUT = 2,
  MS_STATUS_NO_CONVERGENCE = 3,
  MS_STATUS_INTERNAL = 4,
} MsStatus;

// An orthogonal pair `(V, W)` of isometries.
typedef struct MsPair MsPair;

typedef struct MsComplex {
  double re;
  double im;
} MsComplex;

typedef struct MsDescentConfig {
  size_t max_iters;
  // Step of the modulus iteration, in (0, 1].
  double step;
  double grad_tol;
  size_t restarts;
  uint64_t seed;
  bool line_search;
  bool refine;
} MsDescentConfig;

typedef struct MsAdequacy {
  double delta;
  double grad_norm;
  double lambda;
  double mu;
  size_t iterations;
  size_t restart_index;
  bool converged;
} MsAdequacy;

typedef struct MsOracle {
  double delta;
  double fw_gap;
  size_t iters;
  bool converged;
} MsOracle;

typedef struct MsCertificate {
  double det;
  double residual;
  bool valid;
} MsCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Validates `V` (`n x r`) and `W` (`n x s`) and stores a new handle in
// `*out`. Release it with [`ms_pair_free`].
//
// # Safety
// `v` and `w` must point to `n * r` and `n * s` elements; `out` must be
// writable.
enum MsStatus ms_pair_new(size_t n,
                          size_t r,
                          size_t s,
                          const struct MsComplex *v,
                          const struct MsComplex *w,
                          double ortho_tol,
                          struct MsPair **out);

// Parses a pair file (`{"n", "V", "W"}`) from a nul-terminated UTF-8
// string and validates it with the default tolerance.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum MsStatus ms_pair_from_json(const char *json, struct MsPair **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `pair` must be null or a handle not yet freed.
void ms_pair_free(struct MsPair *pair);

// Writes `n`, `dim V` and `dim W`. Null outputs are skipped.
//
// # Safety
// `pair` must be a live handle; non-null outputs must be writable.
enum MsStatus ms_pair_dims(const struct MsPair *pair, size_t *n, size_t *r, size_t *s);

struct MsDescentConfig ms_descent_config_default(void);

// Multi-start descent estimate of the adequacy. The result is written even
// when the status is [`MsStatus::NoConvergence`].
//
// # Safety
// `pair` must be a live handle, `cfg` readable and `out` writable.
enum MsStatus ms_adequacy(const struct MsPair *pair,
                          const struct MsDescentConfig *cfg,
                          struct MsAdequacy *out);

// Frank-Wolfe estimate of the adequacy with exact line search. The result
// is written even when the status is [`MsStatus::NoConvergence`].
//
// # Safety
// `pair` must be a live handle and `out` writable.
enum MsStatus ms_oracle(const struct MsPair *pair,
                        double gap_tol,
                        size_t max_iters,
                        struct MsOracle *out);

// `out[i] = Σ_j |m[i, j]|²` for an `rows x cols` matrix.
//
// # Safety
// `m` must point to `rows * cols` elements and `out` to `rows` writable
// doubles.
enum MsStatus ms_hadamard_square(size_t rows, size_t cols, const struct MsComplex *m, double *out);

// Solves the square moment system of `n` columns (`n x n`) against the
// generator `w` (`n x 1`). Coefficients go to `x` (`n` doubles).
//
// # Safety
// `columns`, `w` must point to `n * n` and `n` elements; `x` to `n`
// writable doubles; `out` must be writable.
enum MsStatus ms_support_certificate(size_t n,
                                     const struct MsComplex *columns,
                                     const struct MsComplex *w,
                                     double *x,
                                     struct MsCertificate *out);

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *ms_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINSUPPORT_H */
