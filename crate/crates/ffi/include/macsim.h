#ifndef MACSIM_H
#define MACSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MacsimAlgorithm {
  MACSIM_ALGORITHM_COUNTING_BACKOFF = 0,
  MACSIM_ALGORITHM_QUADRUPLE_ROUND = 1,
  MACSIM_ALGORITHM_QUEUE_BACKOFF = 2,
  MACSIM_ALGORITHM_ACK_PERSISTENT = 3,
} MacsimAlgorithm;

typedef enum MacsimStatus {
  MACSIM_STATUS_OK = 0,
  MACSIM_STATUS_NULL_POINTER = 1,
  MACSIM_STATUS_INVALID_ARGUMENT = 2,
  MACSIM_STATUS_BUDGET_VIOLATION = 3,
  MACSIM_STATUS_INVARIANT_VIOLATION = 4,
  MACSIM_STATUS_IO = 5,
  MACSIM_STATUS_PANIC = 6,
} MacsimStatus;

/**
 * Opaque simulation handle.
 */
typedef struct MacsimSimulation MacsimSimulation;

/**
 * Summary of the rounds simulated so far.
 */
typedef struct MacsimMetrics {
  uint64_t rounds;
  uint64_t injected;
  uint64_t heard;
  /**
   * Largest latency of a heard packet; meaningful when `heard > 0`.
   */
  uint64_t max_latency;
  uint64_t max_queued;
  uint64_t unheard;
  uint64_t silent_rounds;
  uint64_t collision_rounds;
} MacsimMetrics;

/**
 * An exact bound `numerator / denominator`, or unbounded when `finite` is
 * false.
 */
typedef struct MacsimBound {
  bool finite;
  int64_t numerator;
  int64_t denominator;
} MacsimBound;

typedef struct MacsimBounds {
  struct MacsimBound latency;
  struct MacsimBound queue;
} MacsimBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *macsim_version(void);

/**
 * Copy of the last error message on this thread, or null if none. Free with
 * [`macsim_string_free`].
 */
char *macsim_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void macsim_string_free(char *s);

/**
 * Creates a simulation from a JSON run configuration.
 *
 * # Safety
 * `config_json` must be a valid NUL-terminated string and `out` a valid
 * pointer to write the handle to.
 */
enum MacsimStatus macsim_simulation_new(const char *config_json, struct MacsimSimulation **out);

/**
 * # Safety
 * `sim` must be null or a handle from [`macsim_simulation_new`], not yet
 * freed.
 */
void macsim_simulation_free(struct MacsimSimulation *sim);

/**
 * Advances the simulation by `rounds` rounds, stopping at the horizon.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum MacsimStatus macsim_simulation_step(struct MacsimSimulation *sim, uint64_t rounds);

/**
 * Runs the simulation to its horizon.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum MacsimStatus macsim_simulation_run(struct MacsimSimulation *sim);

/**
 * Number of rounds simulated so far; 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
uint64_t macsim_simulation_rounds(const struct MacsimSimulation *sim);

/**
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum MacsimStatus macsim_simulation_metrics(const struct MacsimSimulation *sim,
                                            struct MacsimMetrics *out);

/**
 * The trace so far as CSV. Free `*out` with [`macsim_string_free`].
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum MacsimStatus macsim_simulation_trace_csv(const struct MacsimSimulation *sim, char **out);

/**
 * Latency and queue bounds of `algorithm` against type `(p/q, b)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MacsimStatus macsim_bounds(enum MacsimAlgorithm algorithm,
                                int64_t rho_numerator,
                                int64_t rho_denominator,
                                uint32_t b,
                                struct MacsimBounds *out);

/**
 * Checks per-round injection totals `counts[0..len]` (round 1 first)
 * against every window budget of type `(p/q, b)`.
 *
 * # Safety
 * `counts` must point to `len` readable values (or be null with `len == 0`)
 * and `valid` must be a valid pointer.
 */
enum MacsimStatus macsim_validate_schedule(const uint64_t *counts,
                                           size_t len,
                                           int64_t rho_numerator,
                                           int64_t rho_denominator,
                                           uint32_t b,
                                           bool *valid);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MACSIM_H */
