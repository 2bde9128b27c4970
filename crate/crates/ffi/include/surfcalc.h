#ifndef SURFCALC_H
#define SURFCALC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SC_OK 0

/**
 * A required pointer argument was null.
 */
#define SC_ERR_NULL 1

/**
 * Invalid configuration or argument.
 */
#define SC_ERR_CONFIG 2

/**
 * Degenerate geometry or a point outside the domain or time window.
 */
#define SC_ERR_GEOMETRY 3

/**
 * Stability bound exceeded, positivity lost or a difference quotient lost to cancellation.
 */
#define SC_ERR_NUMERIC 4

#define SC_ERR_IO 5

/**
 * A string argument was not valid UTF-8.
 */
#define SC_ERR_UTF8 6

/**
 * An index or buffer length was out of range.
 */
#define SC_ERR_RANGE 7

/**
 * Internal failure; the handle arguments are left untouched.
 */
#define SC_ERR_PANIC 8

/**
 * `derivative_mode` value selecting closed-form flow-map jets.
 */
#define SC_MODE_ANALYTIC 0

/**
 * `derivative_mode` value selecting finite differences of sampled positions.
 */
#define SC_MODE_FINITE_DIFFERENCE 1

/**
 * Surface geometry sampled on a grid at one time.
 */
typedef struct ScGeometry ScGeometry;

/**
 * The outcome of running a scenario.
 */
typedef struct ScReport ScReport;

/**
 * A parsed and validated scenario.
 */
typedef struct ScScenario ScScenario;

/**
 * Verdict on one check over the resolutions of a run.
 */
typedef struct ScCheckSummary {
  uint32_t resolutions;
  double finest_rel_residual;
  /**
   * Smallest observed order; NaN when no order was measured.
   */
  double min_order;
  /**
   * 1 if every refinement step hit the roundoff floor.
   */
  int32_t exact;
  /**
   * 1 if the check met its tolerance.
   */
  int32_t pass;
} ScCheckSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library as a static NUL-terminated string.
 */
const char *sc_version(void);

/**
 * Copies the last error message of this thread; see `copy_out` conventions:
 * `buf` may be null to query the size through `needed`.
 */
int32_t sc_last_error(char *buf, size_t len, size_t *needed);

/**
 * Parses scenario JSON. On success `*out` owns a new handle.
 */
int32_t sc_scenario_from_json(const char *json, struct ScScenario **out);

/**
 * Releases a scenario; null is ignored.
 */
void sc_scenario_free(struct ScScenario *sc);

/**
 * Runs every selected suite; `threads == 0` uses the global pool.
 */
int32_t sc_scenario_run(const struct ScScenario *sc, uint32_t threads, struct ScReport **out);

/**
 * Releases a report; null is ignored.
 */
void sc_report_free(struct ScReport *r);

/**
 * `*passed` is 1 if every check met its tolerance, else 0.
 */
int32_t sc_report_passed(const struct ScReport *r, int32_t *passed);

/**
 * Number of checks with a verdict.
 */
int32_t sc_report_check_count(const struct ScReport *r, size_t *count);

int32_t sc_report_check(const struct ScReport *r, size_t index, struct ScCheckSummary *out);

/**
 * Copies `suite/check` of the check at `index`.
 */
int32_t sc_report_check_name(const struct ScReport *r,
                             size_t index,
                             char *buf,
                             size_t len,
                             size_t *needed);

/**
 * Writes all report files into the directory `dir`.
 */
int32_t sc_report_write(const struct ScReport *r, const char *dir);

/**
 * Builds the geometry of a surface (JSON of one catalog entry) on an
 * `n1 × n2` grid at time `t` with second-order stencils and trapezoid weights.
 */
int32_t sc_geometry_new(const char *surface_json,
                        uint32_t n1,
                        uint32_t n2,
                        double t,
                        int32_t derivative_mode,
                        struct ScGeometry **out);

/**
 * Releases a geometry; null is ignored.
 */
void sc_geometry_free(struct ScGeometry *g);

/**
 * Number of grid nodes.
 */
int32_t sc_geometry_len(const struct ScGeometry *g, size_t *len);

/**
 * Node positions as `x, y, z` triples; `len` must be three times the node count.
 */
int32_t sc_geometry_positions(const struct ScGeometry *g, double *out, size_t len);

/**
 * Mean curvature at every node.
 */
int32_t sc_geometry_mean_curvature(const struct ScGeometry *g, double *out, size_t len);

/**
 * Area element `√G` at every node.
 */
int32_t sc_geometry_sqrt_g(const struct ScGeometry *g, double *out, size_t len);

/**
 * `∫ f dH²` for node values `f`.
 */
int32_t sc_surface_integral(const struct ScGeometry *g, const double *f, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURFCALC_H */
