/* C interface to the secure RIS-ISAC beamforming simulator.
 *
 * All handles are opaque. Every function returning isac_status leaves a message retrievable with
 * isac_last_error() on failure (thread local). Strings returned through char** are owned by the
 * caller and released with isac_string_free.
 */
#ifndef ISAC_ISAC_H
#define ISAC_ISAC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ISAC_API __declspec(dllexport)
#else
#define ISAC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum isac_status {
  ISAC_OK = 0,
  ISAC_E_INVALID_INPUT = 1,
  ISAC_E_INFEASIBLE_BRACKET = 2,
  ISAC_E_INFEASIBLE_SUBPROBLEM = 3,
  ISAC_E_DEGENERATE_SENSING = 4,
  ISAC_E_CONFIG = 5,
  ISAC_E_IO = 6,
  ISAC_E_UNKNOWN_SCHEME = 7,
  ISAC_E_INTERNAL = 99
} isac_status;

typedef struct isac_config isac_config;
typedef struct isac_trial isac_trial;

ISAC_API const char* isac_status_string(isac_status status);
ISAC_API const char* isac_last_error(void);
ISAC_API void isac_string_free(char* s);

/* Flat key=value configuration. Unknown keys are rejected. */
ISAC_API isac_status isac_config_load(const char* path, isac_config** out);
ISAC_API isac_status isac_config_parse(const char* text, isac_config** out);
ISAC_API isac_status isac_config_set(isac_config* cfg, const char* key, const char* value);
ISAC_API void isac_config_free(isac_config* cfg);

/* One trial of a scheme (proposed, fpa, rpa, separate, comm_only, random_phase).
 * seed = 0 uses the config's seed key. */
ISAC_API isac_status isac_trial_run(const isac_config* cfg, const char* scheme, uint64_t seed, isac_trial** out);
ISAC_API void isac_trial_free(isac_trial* trial);
ISAC_API double isac_trial_sum_rate(const isac_trial* trial);
ISAC_API double isac_trial_secrecy(const isac_trial* trial);
/* 1 when the run converged with the original constraints satisfied, 0 otherwise. */
ISAC_API int isac_trial_converged(const isac_trial* trial);
ISAC_API int isac_trial_degraded(const isac_trial* trial);
ISAC_API int isac_trial_iterations(const isac_trial* trial);
ISAC_API isac_status isac_trial_report(const isac_trial* trial, char** out);
/* Iteration trace as CSV (outer_iter, inner_iter, rho, objective, violation, sum_rate). */
ISAC_API isac_status isac_trial_trace_csv(const isac_trial* trial, char** out);

/* Runs the sweep described by the sweep.* keys. trials > 0 overrides sweep.trials, threads = 0 uses
 * ISAC_THREADS or the hardware concurrency. Writes out_path plus .aggregate.csv and .timing.csv
 * siblings. converged/total receive the trial counts when non-null. */
ISAC_API isac_status isac_sweep_run(const isac_config* cfg, int trials, const char* out_path, int threads,
                                    int* converged, int* total);

/* Quick oracle and invariant checks; *passed is 1 when all pass, log receives one line per check. */
ISAC_API isac_status isac_self_check(uint64_t seed, int* passed, char** log);

#ifdef __cplusplus
}
#endif

#endif
