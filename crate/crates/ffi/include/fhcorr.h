#ifndef FHCORR_H
#define FHCORR_H

#pragma once

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum FhcStatus {
  FHC_STATUS_OK = 0,
  FHC_STATUS_NULL_POINTER = 1,
  FHC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Bad input data, configuration or file.
   */
  FHC_STATUS_INPUT_ERROR = 3,
  /**
   * Non-finite values, non-Hermitian matrices, solver failures.
   */
  FHC_STATUS_NUMERICAL_ERROR = 4,
  FHC_STATUS_OUT_OF_RANGE = 5,
  FHC_STATUS_PANIC = 6,
} FhcStatus;

typedef enum FhcComponentTag {
  FHC_COMPONENT_TAG_IMMEDIATE = 0,
  FHC_COMPONENT_TAG_DELAYED = 1,
  FHC_COMPONENT_TAG_CHAOTIC = 2,
} FhcComponentTag;

typedef enum FhcGraphKind {
  FHC_GRAPH_KIND_MST = 0,
  FHC_GRAPH_KIND_PMFG = 1,
} FhcGraphKind;

typedef enum FhcPhaseBin {
  FHC_PHASE_BIN_SMALL = 0,
  FHC_PHASE_BIN_QUARTER = 1,
  FHC_PHASE_BIN_OPPOSITE = 2,
} FhcPhaseBin;

typedef struct FhcCorrelation FhcCorrelation;

typedef struct FhcGraph FhcGraph;

/**
 * Log-price series on the seconds axis, all of the same duration.
 */
typedef struct FhcSeriesSet FhcSeriesSet;

typedef struct FhcSpectrum FhcSpectrum;

typedef struct FhcComponent {
  double eigenvalue;
  double dispersion;
  enum FhcComponentTag tag;
} FhcComponent;

/**
 * A directed edge: `theta` is the phase from `from` to `to`, non-positive
 * unless `bidirectional`.
 */
typedef struct FhcEdge {
  size_t from;
  size_t to;
  double magnitude;
  double theta;
  enum FhcPhaseBin bin;
  bool bidirectional;
} FhcEdge;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *fhc_version(void);

/**
 * Copy the calling thread's last error message into `buf` (truncated and
 * NUL-terminated) and return the buffer size needed for the whole message,
 * or 0 if no error has been recorded.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t fhc_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum FhcStatus fhc_series_set_new(struct FhcSeriesSet **out);

/**
 * Add one asset: `len` events at `times` (seconds in `[0, t_span]`,
 * strictly increasing) with log prices `log_prices`. Events that repeat
 * the previous price are dropped.
 *
 * # Safety
 * `set` must come from [`fhc_series_set_new`]; `asset_id` must be a
 * NUL-terminated string; `times` and `log_prices` must hold `len` values.
 */
enum FhcStatus fhc_series_set_add(struct FhcSeriesSet *set,
                                  const char *asset_id,
                                  const double *times,
                                  const double *log_prices,
                                  size_t len,
                                  double t_span);

/**
 * # Safety
 * `set` must be NULL or a live handle.
 */
size_t fhc_series_set_len(const struct FhcSeriesSet *set);

/**
 * # Safety
 * `set` must be NULL or a handle not yet freed.
 */
void fhc_series_set_free(struct FhcSeriesSet *set);

/**
 * Complex correlation matrix at cutoff `tau` seconds. With `per_session`
 * each session is estimated separately and the covariances averaged.
 *
 * # Safety
 * `set` must be a live handle and `out` a valid pointer.
 */
enum FhcStatus fhc_estimate(const struct FhcSeriesSet *set,
                            double tau,
                            bool per_session,
                            struct FhcCorrelation **out);

/**
 * # Safety
 * `rho` must be NULL or a live handle.
 */
size_t fhc_correlation_size(const struct FhcCorrelation *rho);

/**
 * Asset name of row `i`, valid until the handle is freed; NULL if out of
 * range.
 *
 * # Safety
 * `rho` must be NULL or a live handle.
 */
const char *fhc_correlation_asset(const struct FhcCorrelation *rho, size_t i);

/**
 * Entry `ρ_ij` as real and imaginary parts.
 *
 * # Safety
 * `rho` must be a live handle; `re` and `im` valid pointers.
 */
enum FhcStatus fhc_correlation_get(const struct FhcCorrelation *rho,
                                   size_t i,
                                   size_t j,
                                   double *re,
                                   double *im);

/**
 * Entry `ρ_ij` as magnitude and phase; `theta < 0` means `i` leads `j`.
 *
 * # Safety
 * `rho` must be a live handle; `magnitude` and `theta` valid pointers.
 */
enum FhcStatus fhc_correlation_polar(const struct FhcCorrelation *rho,
                                     size_t i,
                                     size_t j,
                                     double *magnitude,
                                     double *theta);

/**
 * # Safety
 * `rho` must be NULL or a handle not yet freed.
 */
void fhc_correlation_free(struct FhcCorrelation *rho);

/**
 * Eigendecomposition with default component classification (no sectors).
 *
 * # Safety
 * `rho` must be a live handle and `out` a valid pointer.
 */
enum FhcStatus fhc_spectrum_new(const struct FhcCorrelation *rho, struct FhcSpectrum **out);

/**
 * # Safety
 * `sp` must be NULL or a live handle.
 */
size_t fhc_spectrum_size(const struct FhcSpectrum *sp);

/**
 * Component `k` (0-based, largest eigenvalue first).
 *
 * # Safety
 * `sp` must be a live handle and `out` a valid pointer.
 */
enum FhcStatus fhc_spectrum_component(const struct FhcSpectrum *sp,
                                      size_t k,
                                      struct FhcComponent *out);

/**
 * Copy eigenvector `k` into `re` and `im`, each of length `len` equal to
 * the matrix size.
 *
 * # Safety
 * `sp` must be a live handle; `re` and `im` must hold `len` writable values.
 */
enum FhcStatus fhc_spectrum_vector(const struct FhcSpectrum *sp,
                                   size_t k,
                                   double *re,
                                   double *im,
                                   size_t len);

/**
 * # Safety
 * `sp` must be NULL or a handle not yet freed.
 */
void fhc_spectrum_free(struct FhcSpectrum *sp);

/**
 * Filtered graph with oriented edges. With `drop_market` the largest
 * component is removed and the matrix renormalised first; `theta_sym` is
 * the phase below which an edge counts as bidirectional.
 *
 * # Safety
 * `rho` must be a live handle and `out` a valid pointer.
 */
enum FhcStatus fhc_graph_new(const struct FhcCorrelation *rho,
                             enum FhcGraphKind kind,
                             bool drop_market,
                             double theta_sym,
                             struct FhcGraph **out);

/**
 * # Safety
 * `g` must be NULL or a live handle.
 */
size_t fhc_graph_edge_count(const struct FhcGraph *g);

/**
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum FhcStatus fhc_graph_edge(const struct FhcGraph *g, size_t i, struct FhcEdge *out);

/**
 * # Safety
 * `g` must be NULL or a handle not yet freed.
 */
void fhc_graph_free(struct FhcGraph *g);

/**
 * Run every pipeline stage for the TOML configuration at `config_path`.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string.
 */
enum FhcStatus fhc_run_pipeline(const char *config_path, bool resume);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FHCORR_H */
