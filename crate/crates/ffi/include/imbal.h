#ifndef IMBAL_H
#define IMBAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum ImbalStatus {
  IMBAL_STATUS_OK = 0,
  IMBAL_STATUS_NULL_POINTER = 1,
  IMBAL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input data violate a model requirement (single class, degenerate
   * support, point outside the support, ...).
   */
  IMBAL_STATUS_INVALID_DATA = 3,
  /**
   * The maximum likelihood estimate does not exist (separation or
   * divergence with `kappa = 0`).
   */
  IMBAL_STATUS_DIVERGENCE = 4,
  IMBAL_STATUS_NUMERICAL_FAILURE = 5,
  IMBAL_STATUS_BUFFER_TOO_SMALL = 6,
  IMBAL_STATUS_PANIC = 7,
} ImbalStatus;

/**
 * A binary-response dataset with `m` rows and `p` covariates.
 */
typedef struct ImbalDataset ImbalDataset;

/**
 * A finitely supported covariate distribution.
 */
typedef struct ImbalDistribution ImbalDistribution;

typedef struct ImbalGlmFit ImbalGlmFit;

/**
 * A link family, e.g. parsed from `"logistic"` or `"t-logistic:1.5"`.
 */
typedef struct ImbalLink ImbalLink;

typedef struct ImbalPppFit ImbalPppFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next `imbal_*` call on the same thread.
 */
const char *imbal_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *imbal_version(void);

/**
 * The q-exponential `[1 + (1-q) z]_+^{1/(1-q)}` (`exp(z)` at `q = 1`).
 */
double imbal_exp_q(double z, double q);

/**
 * `log exp_q(z)`.
 */
double imbal_ln_exp_q(double z, double q);

/**
 * Parses a link tag into a new handle.
 *
 * # Safety
 * `tag` must be a valid NUL-terminated string; `out` must be writable.
 */
enum ImbalStatus imbal_link_parse(const char *tag, struct ImbalLink **out);

/**
 * # Safety
 * `link` must be NULL or a handle from [`imbal_link_parse`] not yet freed.
 */
void imbal_link_free(struct ImbalLink *link);

/**
 * Lower tail index `q` of the link's distribution.
 *
 * # Safety
 * `link` must be a live handle; `out` must be writable.
 */
enum ImbalStatus imbal_link_tail_index(const struct ImbalLink *link, double *out);

/**
 * `G(z)`.
 *
 * # Safety
 * `link` must be a live handle; `out` must be writable.
 */
enum ImbalStatus imbal_link_cdf(const struct ImbalLink *link, double z, double *out);

/**
 * Normalizing constants `(q, c_m, d_m)` with `m G(c_m + d_m z) -> exp_q(z)`.
 *
 * # Safety
 * `link` must be a live handle; the three outputs must be writable.
 */
enum ImbalStatus imbal_link_normalizing(const struct ImbalLink *link,
                                        uint64_t m,
                                        double *q_out,
                                        double *c_out,
                                        double *d_out);

/**
 * Builds a dataset from row-major covariates `x` (`m * p` values) and
 * labels `y` (`m` values, nonzero = positive).
 *
 * # Safety
 * `x` must hold `m * p` readable values, `y` `m` values; `out` must be writable.
 */
enum ImbalStatus imbal_dataset_new(const double *x,
                                   const uint8_t *y,
                                   size_t m,
                                   size_t p,
                                   struct ImbalDataset **out);

/**
 * # Safety
 * `data` must be NULL or a live handle.
 */
void imbal_dataset_free(struct ImbalDataset *data);

/**
 * Builds a distribution from `len` row-major support points of dimension
 * `p` and their weights (positive, summing to one).
 *
 * # Safety
 * `points` must hold `len * p` values, `weights` `len` values; `out` must be writable.
 */
enum ImbalStatus imbal_distribution_new(const double *points,
                                        const double *weights,
                                        size_t len,
                                        size_t p,
                                        struct ImbalDistribution **out);

/**
 * Empirical distribution of a dataset's covariates.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum ImbalStatus imbal_distribution_from_dataset(const struct ImbalDataset *data,
                                                 struct ImbalDistribution **out);

/**
 * Number of support points.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be writable.
 */
enum ImbalStatus imbal_distribution_len(const struct ImbalDistribution *dist, size_t *out);

/**
 * # Safety
 * `dist` must be NULL or a live handle.
 */
void imbal_distribution_free(struct ImbalDistribution *dist);

/**
 * Fits the binomial regression model. `kappa < 0` means no penalty.
 *
 * # Safety
 * `data` and `link` must be live handles; `out` must be writable.
 */
enum ImbalStatus imbal_glm_fit(const struct ImbalDataset *data,
                               const struct ImbalLink *link,
                               double kappa,
                               struct ImbalGlmFit **out);

/**
 * Raw coefficients `a` and `b` (`b_len >= p`).
 *
 * # Safety
 * `fit` must be a live handle; `a_out` writable; `b_out` must hold `b_len` values.
 */
enum ImbalStatus imbal_glm_fit_coefficients(const struct ImbalGlmFit *fit,
                                            double *a_out,
                                            double *b_out,
                                            size_t b_len);

/**
 * Coefficients on the normalized scale at sample size `m`.
 *
 * # Safety
 * `fit` must be a live handle; `alpha_out` writable; `beta_out` must hold `beta_len` values.
 */
enum ImbalStatus imbal_glm_fit_normalized(const struct ImbalGlmFit *fit,
                                          uint64_t m,
                                          double *alpha_out,
                                          double *beta_out,
                                          size_t beta_len);

/**
 * Maximized log-likelihood (without the penalty).
 *
 * # Safety
 * `fit` must be a live handle; `out` must be writable.
 */
enum ImbalStatus imbal_glm_fit_log_likelihood(const struct ImbalGlmFit *fit, double *out);

/**
 * # Safety
 * `fit` must be NULL or a live handle.
 */
void imbal_glm_fit_free(struct ImbalGlmFit *fit);

/**
 * Additive-smoothing point-process fit from event counts at each support
 * point (`len` must equal the support size).
 *
 * # Safety
 * `dist` must be a live handle, `counts` must hold `len` values; `out` must be writable.
 */
enum ImbalStatus imbal_ppp_fit_counts(double q,
                                      const struct ImbalDistribution *dist,
                                      const uint64_t *counts,
                                      size_t len,
                                      double kappa,
                                      struct ImbalPppFit **out);

/**
 * Fitted `alpha` and `beta` (`beta_len >= p`).
 *
 * # Safety
 * `fit` must be a live handle; `alpha_out` writable; `beta_out` must hold `beta_len` values.
 */
enum ImbalStatus imbal_ppp_fit_params(const struct ImbalPppFit *fit,
                                      double *alpha_out,
                                      double *beta_out,
                                      size_t beta_len);

/**
 * Fitted total intensity `Lambda`.
 *
 * # Safety
 * `fit` must be a live handle; `out` must be writable.
 */
enum ImbalStatus imbal_ppp_fit_total_intensity(const struct ImbalPppFit *fit, double *out);

/**
 * # Safety
 * `fit` must be NULL or a live handle.
 */
void imbal_ppp_fit_free(struct ImbalPppFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMBAL_H */
