#ifndef SOS_FFI_H
#define SOS_FFI_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SosStatus {
  SOS_STATUS_OK = 0,
  SOS_STATUS_NULL_POINTER = 1,
  SOS_STATUS_INVALID_ARGUMENT = 2,
  SOS_STATUS_CONFIG = 3,
  SOS_STATUS_NOT_FOUND = 4,
  SOS_STATUS_CONFLICT = 5,
  SOS_STATUS_TOO_LARGE = 6,
  SOS_STATUS_INFEASIBLE = 7,
  SOS_STATUS_UNSUPPORTED = 8,
  SOS_STATUS_IO = 9,
  SOS_STATUS_PANIC = 10,
} SosStatus;

/**
 * Opaque Chord overlay.
 */
typedef struct SosOverlay SosOverlay;

/**
 * Opaque result of one harness run.
 */
typedef struct SosRun SosRun;

/**
 * Denial-scenario parameters, mirroring `ScenarioParams`.
 */
typedef struct SosScenario {
  size_t nodes;
  size_t soaps_per_user;
  size_t beacons;
  size_t servlets;
  size_t attacked;
  bool disjoint;
  /**
   * When false the beacon layer is not counted.
   */
  bool count_beacons;
} SosScenario;

/**
 * One comparison row. Missing estimates are NaN.
 */
typedef struct SosComparisonRow {
  size_t nodes;
  size_t attacked;
  double analytic;
  double enumerated;
  double mc_mean;
  double mc_half_width;
  bool pass;
} SosComparisonRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 * Release with [`sos_string_free`].
 */
char *sos_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void sos_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sos_version(void);

/**
 * Closed-form denial probability. Requires disjoint layers.
 *
 * # Safety
 * `scenario` and `out_probability` must be valid pointers.
 */
enum SosStatus sos_analytic_denial(const struct SosScenario *scenario, double *out_probability);

/**
 * Exact denial probability by enumerating every attacked set, using the
 * canonical role placement. Fails with `TooLarge` above `cap` subsets.
 *
 * # Safety
 * `scenario` and `out_probability` must be valid pointers.
 */
enum SosStatus sos_enumerate_denial(const struct SosScenario *scenario,
                                    uint64_t cap,
                                    double *out_probability);

/**
 * Monte Carlo estimate with a three-sigma half-width.
 *
 * # Safety
 * All pointers must be valid.
 */
enum SosStatus sos_montecarlo_denial(const struct SosScenario *scenario,
                                     uint64_t trials,
                                     uint64_t seed,
                                     double *out_mean,
                                     double *out_half_width);

/**
 * # Safety
 * `out_overlay` must be a valid pointer.
 */
enum SosStatus sos_overlay_new(uint32_t bits, struct SosOverlay **out_overlay);

/**
 * # Safety
 * `overlay` must be null or a handle from [`sos_overlay_new`] not yet freed.
 */
void sos_overlay_free(struct SosOverlay *overlay);

/**
 * Adds a node whose identifier is the hash of `address`.
 *
 * # Safety
 * `overlay` must be a live handle, `address` a NUL-terminated string and
 * `out_id` null or valid.
 */
enum SosStatus sos_overlay_join(struct SosOverlay *overlay, const char *address, uint64_t *out_id);

/**
 * Adds a node at an explicit identifier.
 *
 * # Safety
 * `overlay` must be a live handle and `address` a NUL-terminated string.
 */
enum SosStatus sos_overlay_join_at(struct SosOverlay *overlay, const char *address, uint64_t id);

/**
 * # Safety
 * `overlay` must be a live handle.
 */
enum SosStatus sos_overlay_leave(struct SosOverlay *overlay, uint64_t id);

/**
 * Number of live nodes; 0 for a null handle.
 *
 * # Safety
 * `overlay` must be null or a live handle.
 */
size_t sos_overlay_live_count(const struct SosOverlay *overlay);

/**
 * Routes `key` from the lowest live node. `out_hops` receives the number
 * of intermediate nodes between the start and the owner.
 *
 * # Safety
 * `overlay` must be a live handle; output pointers must be valid.
 */
enum SosStatus sos_overlay_lookup(const struct SosOverlay *overlay,
                                  uint64_t key,
                                  uint64_t *out_owner,
                                  size_t *out_hops);

/**
 * Runs a scenario given as JSON text. `mode` is one of analytic,
 * enumerate, montecarlo, simulate, compare. `seed` overrides the config
 * seed when `override_seed` is true.
 *
 * # Safety
 * `scenario_json` and `mode` must be NUL-terminated strings; `out_run`
 * must be valid.
 */
enum SosStatus sos_run_scenario(const char *scenario_json,
                                const char *mode,
                                bool override_seed,
                                uint64_t seed,
                                struct SosRun **out_run);

/**
 * # Safety
 * `run` must be null or a handle from [`sos_run_scenario`] not yet freed.
 */
void sos_run_free(struct SosRun *run);

/**
 * Full result as pretty JSON, or null on a null handle.
 * Release with [`sos_string_free`].
 *
 * # Safety
 * `run` must be null or a live handle.
 */
char *sos_run_result_json(const struct SosRun *run);

/**
 * Number of comparison rows; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t sos_run_comparison_len(const struct SosRun *run);

/**
 * # Safety
 * `run` must be a live handle and `out_row` valid.
 */
enum SosStatus sos_run_comparison_row(const struct SosRun *run,
                                      size_t index,
                                      struct SosComparisonRow *out_row);

/**
 * Writes result files into `dir`. `formats` is a comma-separated list of
 * csv, json, dat.
 *
 * # Safety
 * `run` must be a live handle; `dir` and `formats` NUL-terminated strings.
 */
enum SosStatus sos_run_emit(const struct SosRun *run, const char *dir, const char *formats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOS_FFI_H */
