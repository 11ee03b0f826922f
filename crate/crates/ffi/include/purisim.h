#ifndef PURISIM_H
#define PURISIM_H

/* Generated by cbindgen from purisim-ffi; regenerate instead of editing. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call.
 */
typedef enum PurisimStatus {
  /**
   * The call succeeded.
   */
  PurisimStatusOk = 0,
  /**
   * A required pointer argument was null.
   */
  PurisimStatusNullPointer = 1,
  /**
   * An argument was outside its documented domain.
   */
  PurisimStatusInvalidArgument = 2,
  /**
   * A numerical invariant failed during evaluation.
   */
  PurisimStatusNumerical = 3,
  /**
   * The library panicked; the handle is still safe to free.
   */
  PurisimStatusPanic = 4,
} PurisimStatus;

/**
 * Probe-direction strategy selector for [`purisim_scenario_configure`].
 */
typedef enum PurisimStrategy {
  /**
   * Maximize expected information gain over the posterior grid.
   */
  PurisimStrategyAdaptive = 0,
  /**
   * Draw probe directions uniformly at random.
   */
  PurisimStrategyRandom = 1,
} PurisimStrategy;

/**
 * Register-size weighting selector for [`purisim_scenario_configure`].
 */
typedef enum PurisimWeighting {
  /**
   * Average every reachable register size by its exact probability.
   */
  PurisimWeightingExact = 0,
  /**
   * Sample one register size per trial.
   */
  PurisimWeightingSampled = 1,
} PurisimWeighting;

/**
 * Opaque scenario handle; create with [`purisim_scenario_new`].
 */
typedef struct PurisimScenario PurisimScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; never null.
 */
const char *purisim_version(void);

/**
 * Allocates a scenario handle with default settings (six qubits, channel
 * weight 0.75, adaptive strategy, purification off, exact weighting,
 * grid 1024, seed 1, forty thousand trials). Writes the handle to `out`.
 */
enum PurisimStatus purisim_scenario_new(struct PurisimScenario **out);

/**
 * Releases a scenario handle. Null is a no-op.
 */
void purisim_scenario_free(struct PurisimScenario *scenario);

/**
 * Replaces every setting of the scenario, validating the combination.
 * On a validation failure the previous settings are kept.
 */
enum PurisimStatus purisim_scenario_configure(struct PurisimScenario *scenario,
                                              size_t n_qubits,
                                              double c1,
                                              size_t trials,
                                              enum PurisimStrategy strategy,
                                              bool purify,
                                              enum PurisimWeighting weighting,
                                              size_t grid_size,
                                              uint64_t master_seed);

/**
 * Runs the configured scenario. `mean_fidelity` and `std_error` are
 * required. `step_curve`, when not null, must hold `step_len` doubles with
 * `step_len` equal to the configured qubit count; it receives the mean
 * estimation fidelity after each measurement.
 */
enum PurisimStatus purisim_scenario_run(const struct PurisimScenario *scenario,
                                        double *mean_fidelity,
                                        double *std_error,
                                        double *step_curve,
                                        size_t step_len);

/**
 * Number of reachable purified register sizes for an ensemble of
 * `n_qubits` (the sizes are `0, 2, ..., n_qubits`). Needed to size the
 * buffers of [`purisim_purification_stats`].
 */
enum PurisimStatus purisim_purification_count(size_t n_qubits, size_t *count);

/**
 * Writes the register-size probabilities and the matching single-qubit
 * fidelities of the purification step. `sizes`, `probabilities`, and
 * `fidelities` must each hold `len` entries with `len` equal to the count
 * reported by [`purisim_purification_count`].
 */
enum PurisimStatus purisim_purification_stats(size_t n_qubits,
                                              double c1,
                                              size_t *sizes,
                                              double *probabilities,
                                              double *fidelities,
                                              size_t len);

/**
 * Mean single-qubit fidelity after purification, averaged over register
 * sizes by their probabilities.
 */
enum PurisimStatus purisim_mean_purified_fidelity(size_t n_qubits, double c1, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PURISIM_H */
