#ifndef COX_ORDERFLOW_H
#define COX_ORDERFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  COX_STATUS_OK = 0,
  COX_STATUS_NULL_POINTER = 1,
  COX_STATUS_DOMAIN = 2,
  COX_STATUS_INVALID_PARAMS = 3,
  COX_STATUS_INVALID_RESPONSE = 4,
  COX_STATUS_NOT_IN_SKELETON = 5,
  COX_STATUS_EMPTY = 6,
  COX_STATUS_CANNOT_NORMALIZE = 7,
  COX_STATUS_WINDOW_UNDERFLOW = 8,
  COX_STATUS_PRECONDITION = 9,
  COX_STATUS_PARSE = 10,
  COX_STATUS_CONFIG = 11,
  COX_STATUS_IO = 12,
  COX_STATUS_BUFFER_TOO_SMALL = 13,
  COX_STATUS_PANIC = 14,
} CoxStatus;

typedef enum {
  COX_RESPONSE_KIND_LINEAR = 0,
  COX_RESPONSE_KIND_CUBIC = 1,
  COX_RESPONSE_KIND_CONSTANT = 2,
} CoxResponseKind;

typedef struct CoxEstimate CoxEstimate;

typedef struct CoxRecord CoxRecord;

typedef struct CoxResponse CoxResponse;

typedef struct {
  double sigma;
  double mu;
  double horizon;
  size_t bins;
  uint64_t p0;
  uint64_t seed;
} CoxParams;

typedef struct {
  double intensity_ratio;
  double coarse_bin_ratio;
  double sparse_bin_ratio;
  bool passes;
  /**
   * Feasible bin counts; both zero when the range is empty.
   */
  size_t min_bins;
  size_t max_bins;
} CoxRegime;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *cox_last_error_message(void);

CoxStatus cox_response_new(CoxResponseKind kind, CoxResponse **out);

/**
 * Piecewise-linear response through `(u[i], h[i])`; the nodes must span
 * [0, 1] and integrate to one.
 */
CoxStatus cox_response_table(const double *u, const double *h, size_t len, CoxResponse **out);

CoxStatus cox_response_eval(const CoxResponse *response, double u, double *out);

CoxStatus cox_response_inverse(const CoxResponse *response, double t, double *out);

void cox_response_free(CoxResponse *response);

/**
 * Simulates replicate `replicate` of `params` by exact thinning.
 */
CoxStatus cox_simulate(const CoxParams *params,
                       const CoxResponse *response,
                       uint64_t replicate,
                       CoxRecord **out);

CoxStatus cox_record_event_count(const CoxRecord *record, size_t *out);

CoxStatus cox_record_u0(const CoxRecord *record, double *out);

/**
 * Copies the event times into `buffer`, which must hold `capacity` values;
 * `written` receives the event count even when the buffer is too small.
 */
CoxStatus cox_record_event_times(const CoxRecord *record,
                                 double *buffer,
                                 size_t capacity,
                                 size_t *written);

void cox_record_free(CoxRecord *record);

CoxStatus cox_estimate_from_record(const CoxRecord *record, size_t bins, CoxEstimate **out);

/**
 * Estimates from strictly increasing event times in (0, horizon].
 */
CoxStatus cox_estimate_from_events(const double *times,
                                   size_t len,
                                   double horizon,
                                   size_t bins,
                                   CoxEstimate **out);

CoxStatus cox_estimate_mu_hat(const CoxEstimate *estimate, double *out);

CoxStatus cox_estimate_h(const CoxEstimate *estimate, double u, double *out);

CoxStatus cox_estimate_h_inverse(const CoxEstimate *estimate, double t, double *out);

/**
 * Fractional-price estimate at time `t` from the trailing bin-width window.
 */
CoxStatus cox_estimate_y(const CoxEstimate *estimate, double t, double *out);

CoxStatus cox_estimate_bins(const CoxEstimate *estimate, size_t *out);

void cox_estimate_free(CoxEstimate *estimate);

CoxStatus cox_check_regime(const CoxParams *params, CoxRegime *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COX_ORDERFLOW_H */
