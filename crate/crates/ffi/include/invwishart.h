#ifndef INVWISHART_H
#define INVWISHART_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IwStatus {
  IW_STATUS_OK = 0,
  IW_STATUS_NULL_POINTER = 1,
  IW_STATUS_INVALID_ARGUMENT = 2,
  IW_STATUS_NOT_POSITIVE_DEFINITE = 3,
  IW_STATUS_NUMERICAL_FAILURE = 4,
  IW_STATUS_BUFFER_TOO_SMALL = 5,
  IW_STATUS_PANIC = 6,
} IwStatus;

typedef enum IwAlgorithm {
  IW_ALGORITHM_INDIRECT = 0,
  IW_ALGORITHM_DIRECT = 1,
  // Indirect for a covariance scale, direct for a precision scale.
  IW_ALGORITHM_AUTO = 2,
} IwAlgorithm;

typedef enum IwKernel {
  // `log p(A)` for `A ~ W_m(n, Sigma)`.
  IW_KERNEL_WISHART = 0,
  // `log p(B)` for `B ~ IW_m(n, Omega)`.
  IW_KERNEL_INV_WISHART = 1,
  // `log p(U_A)` for the upper Cholesky factor of a Wishart matrix.
  IW_KERNEL_CHOL_WISHART = 2,
  // `log p(U_B)` for the upper Cholesky factor of an inverse-Wishart matrix.
  IW_KERNEL_CHOL_INV_WISHART = 3,
} IwKernel;

// Opaque sampler handle: a validated configuration plus its random stream.
typedef struct IwSampler IwSampler;

// Kernel calls made by the most recent draw.
typedef struct IwOpCounts {
  uint64_t trtri;
  uint64_t trmm;
  uint64_t potrf;
} IwOpCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a sampler. `scale` is the row-major `m x m` scale matrix, read
// as `Sigma`/`Omega` (`iscov`) and as a full matrix or its upper Cholesky
// factor (`ischolu`). The scale is copied.
//
// # Safety
// `scale` must point to `m * m` doubles and `out` to writable storage for
// one pointer. Release the handle with [`iw_sampler_free`].
enum IwStatus iw_sampler_new(size_t m,
                             double n,
                             const double *scale,
                             bool iscov,
                             bool ischolu,
                             bool retcholu,
                             enum IwAlgorithm algorithm,
                             uint64_t seed,
                             struct IwSampler **out);

// Draws one matrix into `out` (`len >= m * m`): `B` or, with `retcholu`,
// its upper Cholesky factor with zeros below the diagonal.
//
// # Safety
// `sampler` must come from [`iw_sampler_new`]; `out` must point to `len`
// writable doubles.
enum IwStatus iw_sampler_draw(struct IwSampler *sampler, double *out, size_t len);

// Kernel counts of the most recent successful draw (all zero before the
// first).
//
// # Safety
// `sampler` must come from [`iw_sampler_new`]; `out` must be writable.
enum IwStatus iw_sampler_op_counts(const struct IwSampler *sampler, struct IwOpCounts *out);

// The algorithm the sampler resolved to (never `IW_ALGORITHM_AUTO`).
//
// # Safety
// `sampler` must come from [`iw_sampler_new`]; `out` must be writable.
enum IwStatus iw_sampler_algorithm(const struct IwSampler *sampler, enum IwAlgorithm *out);

// Releases a sampler. Null is ignored.
//
// # Safety
// `sampler` must be null or come from [`iw_sampler_new`] and not have been
// freed already.
void iw_sampler_free(struct IwSampler *sampler);

enum IwAlgorithm iw_recommend_algorithm(bool iscov, bool ischolu);

// Log density kernel of `x` (row-major `m x m`; upper triangular for the
// Cholesky kinds) up to its normalizing constant.
//
// # Safety
// `x` and `scale` must point to `m * m` doubles; `out` must be writable.
enum IwStatus iw_logkernel(enum IwKernel kind,
                           size_t m,
                           const double *x,
                           double n,
                           const double *scale,
                           bool iscov,
                           bool ischolu,
                           double *out);

// Static, NUL-terminated description of a status code.
const char *iw_status_message(enum IwStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INVWISHART_H */
