#ifndef MAMAB_H
#define MAMAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdint.h>
#include <stddef.h>

typedef enum MamabStatus {
  MAMAB_STATUS_OK = 0,
  MAMAB_STATUS_NULL_POINTER = 1,
  MAMAB_STATUS_INVALID_ARGUMENT = 2,
  MAMAB_STATUS_CONFIG = 3,
  MAMAB_STATUS_IO = 4,
  MAMAB_STATUS_PANIC = 5,
} MamabStatus;

/*
 Monte Carlo regret statistics of one scenario.
 */
typedef struct MamabResult MamabResult;

/*
 A scenario configuration.
 */
typedef struct MamabScenario MamabScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next failing call on the same thread.
 */
const char *mamab_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *mamab_version(void);

/*
 Loads a preset name or a TOML scenario file.

 # Safety
 `source` must be a NUL-terminated string; `out` must be writable.
 */
enum MamabStatus mamab_scenario_load(const char *source, struct MamabScenario **out);

/*
 Parses a scenario from TOML text.

 # Safety
 `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum MamabStatus mamab_scenario_from_toml(const char *toml, struct MamabScenario **out);

/*
 # Safety
 `scenario` must come from this library and not be used afterwards. Null is ignored.
 */
void mamab_scenario_free(struct MamabScenario *scenario);

/*
 # Safety
 `scenario` must be a live handle.
 */
enum MamabStatus mamab_scenario_set_seed(struct MamabScenario *scenario, uint64_t seed);

/*
 # Safety
 `scenario` must be a live handle.
 */
enum MamabStatus mamab_scenario_set_runs(struct MamabScenario *scenario, uintptr_t runs);

/*
 # Safety
 `scenario` must be a live handle.
 */
enum MamabStatus mamab_scenario_set_horizon(struct MamabScenario *scenario, uint64_t horizon);

/*
 # Safety
 `scenario` must be a live handle.
 */
enum MamabStatus mamab_scenario_set_zeta(struct MamabScenario *scenario, double zeta);

/*
 # Safety
 `scenario` must be a live handle; `out` must be writable.
 */
enum MamabStatus mamab_scenario_num_agents(const struct MamabScenario *scenario, uintptr_t *out);

/*
 # Safety
 `scenario` must be a live handle; `out` must be writable.
 */
enum MamabStatus mamab_scenario_num_arms(const struct MamabScenario *scenario, uintptr_t *out);

/*
 Performance measure of `agent`. Fails for agents without neighbors.

 # Safety
 `scenario` must be a live handle; `out` must be writable.
 */
enum MamabStatus mamab_scenario_performance_measure(const struct MamabScenario *scenario,
                                                    uintptr_t agent,
                                                    double *out);

/*
 Runs the Monte Carlo simulation of a scenario.

 # Safety
 `scenario` must be a live handle; `out` must be writable.
 */
enum MamabStatus mamab_run_monte_carlo(const struct MamabScenario *scenario,
                                       struct MamabResult **out);

/*
 Runs the full experiment and writes `regret.csv`, `summary.csv` and
 `report.txt` into `out_dir`.

 # Safety
 `scenario` must be a live handle; `out_dir` must be a NUL-terminated string.
 */
enum MamabStatus mamab_run_experiment(const struct MamabScenario *scenario, const char *out_dir);

/*
 # Safety
 `result` must come from this library and not be used afterwards. Null is ignored.
 */
void mamab_result_free(struct MamabResult *result);

/*
 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum MamabStatus mamab_result_horizon(const struct MamabResult *result, uint64_t *out);

/*
 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum MamabStatus mamab_result_num_agents(const struct MamabResult *result, uintptr_t *out);

/*
 Mean cumulative regret of `agent` after round `t`.

 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum MamabStatus mamab_result_mean_regret(const struct MamabResult *result,
                                          uint64_t t,
                                          uintptr_t agent,
                                          double *out);

/*
 Standard error of the mean cumulative regret of `agent` after round `t`.

 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum MamabStatus mamab_result_stderr_regret(const struct MamabResult *result,
                                            uint64_t t,
                                            uintptr_t agent,
                                            double *out);

/*
 Mean number of pulls of `arm` by `agent` over the horizon.

 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum MamabStatus mamab_result_mean_pulls(const struct MamabResult *result,
                                         uintptr_t agent,
                                         uintptr_t arm,
                                         double *out);

/*
 # Safety
 `out` must be writable.
 */
enum MamabStatus mamab_gamma_constant(double zeta, double xi, uintptr_t num_agents, double *out);

/*
 # Safety
 `out` must be writable.
 */
enum MamabStatus mamab_eta_threshold(double sigma,
                                     double gap,
                                     double xi,
                                     double inflation,
                                     uint64_t horizon,
                                     double *out);

/*
 Bound on the expected number of pulls of an arm with gap `gap`.

 # Safety
 `out` must be writable.
 */
enum MamabStatus mamab_expected_samples_bound(double zeta,
                                              double xi,
                                              uintptr_t num_agents,
                                              double sigma,
                                              double gap,
                                              double inflation,
                                              uint64_t horizon,
                                              double *out);

/*
 # Safety
 `out` must be writable.
 */
enum MamabStatus mamab_concentration_bound(double zeta,
                                           uintptr_t num_agents,
                                           double t,
                                           double delta,
                                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAMAB_H */
