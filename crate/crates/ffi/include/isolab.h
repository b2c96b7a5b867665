#ifndef ISOLAB_H
#define ISOLAB_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ISOLAB_ABI_VERSION 1

typedef enum IsolabStatus {
  ISOLAB_STATUS_OK = 0,
  ISOLAB_STATUS_INVALID_ARGUMENT = 1,
  ISOLAB_STATUS_NO_HORIZON = 2,
  ISOLAB_STATUS_NUMERICAL = 3,
  ISOLAB_STATUS_UNSUPPORTED = 4,
  ISOLAB_STATUS_NULL_POINTER = 5,
  ISOLAB_STATUS_PANIC = 6,
} IsolabStatus;

typedef enum IsolabParity {
  ISOLAB_PARITY_EVEN = 0,
  ISOLAB_PARITY_ODD = 1,
  ISOLAB_PARITY_MIXED = 2,
} IsolabParity;

typedef enum IsolabCurvatureMethod {
  ISOLAB_CURVATURE_METHOD_CLOSED_FORM = 0,
  ISOLAB_CURVATURE_METHOD_FINITE_DIFFERENCE = 1,
  ISOLAB_CURVATURE_METHOD_EXACT = 2,
} IsolabCurvatureMethod;

/**
 * A volume-preserving chart solution on `s >= c`.
 */
typedef struct IsolabChart IsolabChart;

/**
 * A metric on the asymptotic chart.
 */
typedef struct IsolabMetric IsolabMetric;

/**
 * A CMC graph sphere with its solver diagnostics.
 */
typedef struct IsolabSurface IsolabSurface;

typedef struct IsolabChartInfo {
  double m;
  size_t n;
  double r;
  double alpha;
  double c;
  double v0;
  /**
   * Number of tabulated nodes.
   */
  size_t len;
} IsolabChartInfo;

typedef struct IsolabSurfaceInfo {
  double radius;
  double target;
  /**
   * `max |H - target|` over the nodes.
   */
  double residual;
  double sup_u;
  double scaled_norm;
  double sup_h_ring;
  double area;
  size_t iterations;
  /**
   * Number of spectral coefficients.
   */
  size_t len;
} IsolabSurfaceInfo;

typedef struct IsolabSpectrumInfo {
  double mu0;
  double mu1;
  double lambda1;
  double lambda1_predicted;
  double mu0_predicted;
  double laplace_first;
} IsolabSpectrumInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t isolab_abi_version(void);

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *isolab_last_error_message(void);

void isolab_clear_error(void);

/**
 * Creates a metric. `amplitude = 0` disables the perturbation;
 * `translation` may be null or point to `n` doubles.
 *
 * # Safety
 * `translation` must be null or valid for `n` reads; `out` must be valid for a write.
 */
enum IsolabStatus isolab_metric_new(size_t n,
                                    double mass,
                                    double gamma,
                                    double amplitude,
                                    enum IsolabParity parity,
                                    size_t pattern,
                                    const double *translation,
                                    struct IsolabMetric **out);

/**
 * Unperturbed, centered Schwarzschild metric.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum IsolabStatus isolab_metric_schwarzschild(size_t n, double mass, struct IsolabMetric **out);

/**
 * # Safety
 * `metric` must be null or a handle from this library that was not freed.
 */
void isolab_metric_free(struct IsolabMetric *metric);

/**
 * Dimension of the metric, or 0 for a null handle.
 *
 * # Safety
 * `metric` must be null or a live handle.
 */
size_t isolab_metric_dimension(const struct IsolabMetric *metric);

/**
 * Metric components `g_ij(x)`, row-major into `g` (`n * n` doubles).
 *
 * # Safety
 * `x` must be valid for `n` reads and `g` for `n * n` writes.
 */
enum IsolabStatus isolab_metric_components(const struct IsolabMetric *metric,
                                           const double *x,
                                           size_t n,
                                           double *g);

/**
 * Riemann tensor `Rm_ijkl` at `x`, written to `rm` (`n^4` doubles).
 *
 * # Safety
 * `x` must be valid for `n` reads and `rm` for `n^4` writes.
 */
enum IsolabStatus isolab_riemann(const struct IsolabMetric *metric,
                                 const double *x,
                                 size_t n,
                                 enum IsolabCurvatureMethod method,
                                 double *rm);

/**
 * # Safety
 * `out` must be valid for a write.
 */
enum IsolabStatus isolab_horizon_radius(size_t n, double mass, double *out);

/**
 * Area and mean curvature of the centered sphere `S_r` in Schwarzschild.
 *
 * # Safety
 * `area` and `mean_curvature` must be valid for writes.
 */
enum IsolabStatus isolab_sphere(size_t n,
                                double mass,
                                double r,
                                double *area,
                                double *mean_curvature);

/**
 * Normalized Hawking mass of a surface with the given area and mean curvature.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum IsolabStatus isolab_hawking_mass(size_t n, double area, double mean_curvature, double *out);

/**
 * Solves the chart matched to `S_r` and tabulates it on `nodes` points of
 * `[c, s_max_factor c]`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum IsolabStatus isolab_chart_solve(double mass,
                                     size_t n,
                                     double r,
                                     double s_max_factor,
                                     size_t nodes,
                                     struct IsolabChart **out);

/**
 * # Safety
 * `chart` must be a live handle and `info` valid for a write.
 */
enum IsolabStatus isolab_chart_info(const struct IsolabChart *chart, struct IsolabChartInfo *info);

/**
 * Copies the node table; `len` must equal the `len` reported by
 * [`isolab_chart_info`].
 *
 * # Safety
 * `s` and `u` must be valid for `len` writes.
 */
enum IsolabStatus isolab_chart_table(const struct IsolabChart *chart,
                                     double *s,
                                     double *u,
                                     size_t len);

/**
 * # Safety
 * `chart` must be null or a live handle.
 */
void isolab_chart_free(struct IsolabChart *chart);

/**
 * Solves for the CMC graph sphere over `S_radius` with mean curvature
 * `target` (NaN selects the centered Schwarzschild value). `n_phi = 0`
 * selects an axisymmetric grid with `n_theta` nodes; otherwise a full
 * `n_theta x n_phi` grid (n = 3 only).
 *
 * # Safety
 * `metric` must be a live handle and `out` valid for a write.
 */
enum IsolabStatus isolab_cmc_solve(const struct IsolabMetric *metric,
                                   double radius,
                                   double target,
                                   size_t n_theta,
                                   size_t n_phi,
                                   size_t lmax,
                                   double tolerance,
                                   struct IsolabSurface **out);

/**
 * # Safety
 * `surface` must be a live handle and `info` valid for a write.
 */
enum IsolabStatus isolab_surface_info(const struct IsolabSurface *surface,
                                      struct IsolabSurfaceInfo *info);

/**
 * # Safety
 * `coeffs` must be valid for `len` writes.
 */
enum IsolabStatus isolab_surface_coefficients(const struct IsolabSurface *surface,
                                              double *coeffs,
                                              size_t len);

/**
 * Jacobi spectrum of the surface.
 *
 * # Safety
 * `surface` must be a live handle and `info` valid for a write.
 */
enum IsolabStatus isolab_surface_spectrum(const struct IsolabSurface *surface,
                                          struct IsolabSpectrumInfo *info);

/**
 * # Safety
 * `surface` must be null or a live handle.
 */
void isolab_surface_free(struct IsolabSurface *surface);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOLAB_H */
