#ifndef ERNST_THETA_H
#define ERNST_THETA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. `ET_STATUS_OK` is zero; every other value identifies the failure.
typedef enum EtStatus {
  ET_STATUS_OK = 0,
  ET_STATUS_NULL_POINTER = 1,
  ET_STATUS_INVALID_INPUT = 2,
  ET_STATUS_CONFIG_PARSE = 3,
  ET_STATUS_DUPLICATE_BRANCH_POINT = 4,
  ET_STATUS_ODD_BRANCH_COUNT = 5,
  ET_STATUS_REALITY_VIOLATION = 6,
  ET_STATUS_ON_AXIS = 7,
  ET_STATUS_BRANCH_COLLISION = 8,
  ET_STATUS_CUTS_INTERSECT = 9,
  ET_STATUS_ILL_CONDITIONED = 10,
  ET_STATUS_NO_CONVERGENCE = 11,
  ET_STATUS_PATH_THROUGH_BRANCH_POINT = 12,
  ET_STATUS_COINCIDING_POINTS = 13,
  ET_STATUS_POLE_ON_CYCLE = 14,
  ET_STATUS_DIVERGENT_CONTEXT = 15,
  ET_STATUS_NO_NON_SINGULAR_ODD_CHAR = 16,
  ET_STATUS_SINGULAR_PRIME_FORM = 17,
  ET_STATUS_THETA_DIVISOR_HIT = 18,
  ET_STATUS_SINGULAR_REGION = 19,
  ET_STATUS_PANIC = 20,
} EtStatus;

// Period data of a hyperelliptic curve.
typedef struct EtCurve EtCurve;

// A theta-functional Ernst potential.
typedef struct EtSolution EtSolution;

// Theta function for a fixed period matrix.
typedef struct EtTheta EtTheta;

// Metric functions at one point. `mask` is 0 for a regular point, 1 for
// a theta-divisor hit and 2 for any other evaluation error; the other
// fields are NaN when `mask` is nonzero.
typedef struct EtMetric {
  double e2u;
  double a;
  double k;
  uint32_t mask;
} EtMetric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the message of the last failure on this thread into `buf`
// (NUL-terminated, truncated to `len`). Returns the full message length
// in bytes, or 0 when there is none.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t et_last_error(char *buf, size_t len);

// Builds a curve from `n` branch points and computes its period data.
//
// # Safety
// `branch` holds `2n` doubles; `out_curve` is writable.
enum EtStatus et_curve_new(const double *branch, size_t n, struct EtCurve **out_curve);

// # Safety
// `curve` is null or a handle from [`et_curve_new`] not yet freed.
void et_curve_free(struct EtCurve *curve);

// # Safety
// `curve` is a live handle; `genus` is writable.
enum EtStatus et_curve_genus(const struct EtCurve *curve, size_t *genus);

// Writes the normalized period matrix, row-major, as `g²` complex values.
//
// # Safety
// `curve` is a live handle; `b` has room for `2g²` doubles.
enum EtStatus et_curve_period_matrix(const struct EtCurve *curve, double *b);

// Theta context for a `g×g` row-major period matrix.
//
// # Safety
// `b` holds `2g²` doubles; `out_theta` is writable.
enum EtStatus et_theta_new(const double *b, size_t g, double tol, struct EtTheta **out_theta);

// # Safety
// `theta` is null or a handle from [`et_theta_new`] not yet freed.
void et_theta_free(struct EtTheta *theta);

// `Θ[p,q](z)`. `p` and `q` may be null for zero characteristics.
//
// # Safety
// `z`, and `p`, `q` when non-null, hold `2g` doubles; `value` has room for 2.
enum EtStatus et_theta_eval(const struct EtTheta *theta,
                            const double *z,
                            const double *p,
                            const double *q,
                            double *value);

// Ernst potential for `g` branch-point pairs `(E_m, F_m)` given as `4g`
// doubles `E_re, E_im, F_re, F_im`, with characteristics `p`, `q`
// (`2g` doubles each; null for zero).
//
// # Safety
// Pointer arguments hold the stated number of doubles; `out_sol` is writable.
enum EtStatus et_solution_new(const double *pairs,
                              size_t g,
                              const double *p,
                              const double *q,
                              struct EtSolution **out_sol);

// # Safety
// `sol` is null or a handle from [`et_solution_new`] not yet freed.
void et_solution_free(struct EtSolution *sol);

// `ℰ(ρ, ζ)`.
//
// # Safety
// `sol` is a live handle; `value` has room for 2 doubles.
enum EtStatus et_solution_eval(const struct EtSolution *sol,
                               double rho,
                               double zeta,
                               double *value);

// Normalized residual of the Ernst equation at `(ρ, ζ)`.
//
// # Safety
// `sol` is a live handle; `residual` is writable.
enum EtStatus et_solution_residual(const struct EtSolution *sol,
                                   double rho,
                                   double zeta,
                                   double *residual);

// Metric functions at `(ρ, ζ)` with integration constants `A₀`, `K`.
// Evaluation failures are reported through `mask`, not the status.
//
// # Safety
// `sol` is a live handle; `out_metric` is writable.
enum EtStatus et_solution_metric(const struct EtSolution *sol,
                                 double rho,
                                 double zeta,
                                 double a0,
                                 double k,
                                 struct EtMetric *out_metric);

// Runs the seeded identity suite and reports the number of passing and
// failing checks.
//
// # Safety
// `passed` and `failed` are writable.
enum EtStatus et_run_checks(uint64_t seed, size_t genus, size_t *passed, size_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERNST_THETA_H */
