#ifndef DFC_H
#define DFC_H

/* Generated by cbindgen from the dfc-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Named gain schemes.
typedef enum DfcScheme {
  DFC_SCHEME_UNIFORM = 0,
  DFC_SCHEME_DK2013 = 1,
} DfcScheme;

// Result code of every fallible call.
typedef enum DfcStatus {
  DFC_STATUS_OK = 0,
  DFC_STATUS_NULL_POINTER = 1,
  DFC_STATUS_INVALID_ARGUMENT = 2,
  DFC_STATUS_SYNTAX = 3,
  DFC_STATUS_UNKNOWN_IDENTIFIER = 4,
  DFC_STATUS_NON_INTEGER_EXPONENT = 5,
  DFC_STATUS_DOMAIN = 6,
  DFC_STATUS_OVERFLOW = 7,
  DFC_STATUS_DIMENSION_CAP = 8,
  DFC_STATUS_GAIN_SUM = 9,
  DFC_STATUS_NOT_AN_ORBIT = 10,
  DFC_STATUS_ZERO_POLYNOMIAL = 11,
  DFC_STATUS_NO_BOUNDARY_CROSSING = 12,
  DFC_STATUS_BUFFER_TOO_SMALL = 13,
  DFC_STATUS_INVALID_UTF8 = 14,
  DFC_STATUS_PANIC = 15,
} DfcStatus;

// The cycles of one period found on a map's domain.
typedef struct DfcCycleList DfcCycleList;

// A gain vector summing to one.
typedef struct DfcGains DfcGains;

// A scalar map.
typedef struct DfcMap DfcMap;

// A real polynomial.
typedef struct DfcPolynomial DfcPolynomial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *dfc_version(void);

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *dfc_last_error_message(void);

// Parses a designator (`logistic:r=4`) or expression with `n_params`
// bindings `names[i] = values[i]`.
//
// # Safety
// `source` and each `names[i]` must be NUL-terminated strings; `names` and
// `values` must hold `n_params` entries; `out_map` must be writable.
enum DfcStatus dfc_map_parse(const char *source,
                             const char *const *names,
                             const double *values,
                             size_t n_params,
                             struct DfcMap **out_map);

// Replaces the search interval used for cycle detection.
//
// # Safety
// `map` must be a live handle.
enum DfcStatus dfc_map_set_domain(struct DfcMap *map, double lo, double hi);

// `f(x)` and, when `out_deriv` is non-null, `f′(x)`.
//
// # Safety
// `map` must be a live handle; `out_value` must be writable.
enum DfcStatus dfc_map_eval(const struct DfcMap *map,
                            double x,
                            double *out_value,
                            double *out_deriv);

// # Safety
// `map` must be null or a handle not yet freed.
void dfc_map_free(struct DfcMap *map);

// Gain vector from explicit values, which must sum to one.
//
// # Safety
// `values` must hold `len` entries; `out_gains` must be writable.
enum DfcStatus dfc_gains_new(const double *values, size_t len, struct DfcGains **out_gains);

// Gain vector of a named scheme with `n` entries.
//
// # Safety
// `out_gains` must be writable.
enum DfcStatus dfc_gains_scheme(enum DfcScheme scheme, size_t n, struct DfcGains **out_gains);

// Copies the gains into `buf`.
//
// # Safety
// `gains` must be a live handle; `buf` must hold `cap` values.
enum DfcStatus dfc_gains_values(const struct DfcGains *gains,
                                double *buf,
                                size_t cap,
                                size_t *out_len);

// # Safety
// `gains` must be null or a handle not yet freed.
void dfc_gains_free(struct DfcGains *gains);

// Polynomial from ascending coefficients.
//
// # Safety
// `coeffs` must hold `len` values; `out_poly` must be writable.
enum DfcStatus dfc_polynomial_new(const double *coeffs,
                                  size_t len,
                                  struct DfcPolynomial **out_poly);

// `λ^{(N−1)T+1} − μ·q(λ)^T` for the given gains, `N = len(gains)`.
//
// # Safety
// `gains` must be a live handle; `out_poly` must be writable.
enum DfcStatus dfc_char_poly_closed(size_t t,
                                    const struct DfcGains *gains,
                                    double mu,
                                    struct DfcPolynomial **out_poly);

// # Safety
// `poly` must be a live handle; `out_degree` must be writable.
enum DfcStatus dfc_polynomial_degree(const struct DfcPolynomial *poly, size_t *out_degree);

// Ascending coefficients.
//
// # Safety
// `poly` must be a live handle; `buf` must hold `cap` values.
enum DfcStatus dfc_polynomial_coeffs(const struct DfcPolynomial *poly,
                                     double *buf,
                                     size_t cap,
                                     size_t *out_len);

// All roots, sorted by real then imaginary part.
//
// # Safety
// `poly` must be a live handle; `re` and `im` must each hold `cap` values.
enum DfcStatus dfc_polynomial_roots(const struct DfcPolynomial *poly,
                                    double *re,
                                    double *im,
                                    size_t cap,
                                    size_t *out_len);

// # Safety
// `poly` must be a live handle; `out_radius` must be writable.
enum DfcStatus dfc_polynomial_spectral_radius(const struct DfcPolynomial *poly, double *out_radius);

// Jury table verdict: all roots strictly inside the unit disc.
//
// # Safety
// `poly` must be a live handle; `out_stable` must be writable.
enum DfcStatus dfc_polynomial_jury_stable(const struct DfcPolynomial *poly, bool *out_stable);

// Repeated-root test on the Sylvester matrix of `p` and `p′`.
//
// # Safety
// `poly` must be a live handle; `out_repeated` must be writable.
enum DfcStatus dfc_polynomial_has_repeated_roots(const struct DfcPolynomial *poly,
                                                 double tol,
                                                 bool *out_repeated);

// # Safety
// `poly` must be null or a handle not yet freed.
void dfc_polynomial_free(struct DfcPolynomial *poly);

// Row-major Jacobian of the controlled cycle; `out_dim` receives the side
// length `(N−1)T+1` and `buf` must hold its square.
//
// # Safety
// `gains` must be a live handle; `multipliers` must hold `t` values; `buf`
// must hold `cap` values.
enum DfcStatus dfc_build_jacobian(size_t t,
                                  const struct DfcGains *gains,
                                  const double *multipliers,
                                  double *buf,
                                  size_t cap,
                                  size_t *out_dim);

// Stable multiplier interval around zero; `out_lo` is `-INFINITY` when
// unbounded below.
//
// # Safety
// `gains` must be a live handle; `out_lo` and `out_hi` must be writable.
enum DfcStatus dfc_stable_mu_interval(size_t t,
                                      const struct DfcGains *gains,
                                      double *out_lo,
                                      double *out_hi);

// Smallest stabilising `N ≤ n_max`, or 0 when there is none.
//
// # Safety
// `out_n` must be writable.
enum DfcStatus dfc_min_n_to_stabilize(size_t t,
                                      double mu,
                                      enum DfcScheme scheme,
                                      size_t n_max,
                                      size_t *out_n);

// Cycles of minimal period `t` on the map's domain.
//
// # Safety
// `map` must be a live handle; `out_list` must be writable.
enum DfcStatus dfc_find_cycles(const struct DfcMap *map,
                               size_t t,
                               size_t grid_points,
                               struct DfcCycleList **out_list);

// Number of cycles in the list (0 for a null handle).
//
// # Safety
// `list` must be null or a live handle.
size_t dfc_cycle_list_len(const struct DfcCycleList *list);

// Orbit points of cycle `index`, starting at its smallest point.
//
// # Safety
// `list` must be a live handle; `buf` must hold `cap` values.
enum DfcStatus dfc_cycle_points(const struct DfcCycleList *list,
                                size_t index,
                                double *buf,
                                size_t cap,
                                size_t *out_len);

// Multipliers `f′(x_j)` of cycle `index`.
//
// # Safety
// `list` must be a live handle; `buf` must hold `cap` values.
enum DfcStatus dfc_cycle_multipliers(const struct DfcCycleList *list,
                                     size_t index,
                                     double *buf,
                                     size_t cap,
                                     size_t *out_len);

// Product of the multipliers of cycle `index`.
//
// # Safety
// `list` must be a live handle; `out_mu` must be writable.
enum DfcStatus dfc_cycle_product(const struct DfcCycleList *list, size_t index, double *out_mu);

// # Safety
// `list` must be null or a handle not yet freed.
void dfc_cycle_list_free(struct DfcCycleList *list);

// Runs the controlled map towards cycle `index` of `cycles` and reports
// convergence, the settle step (`-1` if none) and the final state.
//
// # Safety
// Handles must be live; `history` must hold `history_len` values; output
// pointers must be writable.
enum DfcStatus dfc_simulate(const struct DfcMap *map,
                            const struct DfcGains *gains,
                            size_t t,
                            const double *history,
                            size_t history_len,
                            size_t steps,
                            const struct DfcCycleList *cycles,
                            size_t index,
                            double tol,
                            bool *out_converged,
                            int64_t *out_settle_step,
                            double *out_final);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DFC_H */
