/* specmatch — cooperative spectrum sharing as a two-sided matching market.
 *
 * C interface to the shared library. All functions return sm_status;
 * results come back through out-parameters. Objects are opaque handles
 * owned by the library and released with their *_free function. Handles
 * are not thread-safe; use one per thread.
 */

#ifndef SPECMATCH_H
#define SPECMATCH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sm_status {
  SM_OK = 0,
  SM_ERR_INVALID_ARGUMENT = 1,
  SM_ERR_IO = 2,
  SM_ERR_PARSE = 3,
  SM_ERR_INFEASIBLE = 4,          /* reservation exceeds what the pair can generate */
  SM_ERR_TARGET_UNREACHABLE = 5,  /* PU utility target above the pair's maximum */
  SM_ERR_ITERATION_CAP = 6,
  SM_ERR_INSTANCE_TOO_LARGE = 7,
  SM_ERR_NO_SOLUTION = 8,
  SM_ERR_ASSIGNMENT_MISMATCH = 9,
  SM_ERR_EMPTY_INPUT = 10,
  SM_ERR_INTERNAL = 11
} sm_status;

/* Static name of a status code ("ok", "invalid-argument", ...). */
const char* sm_status_name(sm_status status);

/* Detail message of the most recent failure on this thread; empty string
 * when the last call succeeded. The pointer stays valid until the next
 * library call on the same thread. */
const char* sm_last_error(void);

const char* sm_version(void);

/* ---- network instances -------------------------------------------------- */

typedef struct sm_instance sm_instance;

/* Generates a random topology. config_path may be NULL for built-in
 * defaults; pus/sus <= -1 keep the config's [market] values. */
sm_status sm_instance_generate(const char* config_path, int pus, int sus,
                               uint64_t seed, sm_instance** out);

sm_status sm_instance_load(const char* path, sm_instance** out);
sm_status sm_instance_save(const sm_instance* inst, const char* path);
void sm_instance_free(sm_instance* inst);

int sm_instance_pu_count(const sm_instance* inst);
int sm_instance_su_count(const sm_instance* inst);

/* ---- utility transfer --------------------------------------------------- */

/* Max PU utility on pair (pu, su) while guaranteeing the SU `su_utility`,
 * plus the contract achieving it. SM_ERR_INFEASIBLE when the pair cannot
 * deliver that reservation. */
sm_status sm_solve_utf(const sm_instance* inst, int pu, int su, double su_utility,
                       double* pu_utility, double* relay_power, double* access_time);

/* Largest SU utility with PU value still >= pu_utility.
 * SM_ERR_TARGET_UNREACHABLE when the target exceeds the pair's maximum. */
sm_status sm_inverse_utf(const sm_instance* inst, int pu, int su, double pu_utility,
                         double* su_utility);

/* ---- matchings ---------------------------------------------------------- */

typedef struct sm_matching sm_matching;

void sm_matching_free(sm_matching* matching);
int sm_matching_pair_count(const sm_matching* matching);
/* Pairs are indexed 0..pair_count-1 in ascending PU order. */
sm_status sm_matching_pair(const sm_matching* matching, int index, int* pu, int* su,
                           double* relay_power, double* access_time,
                           double* su_utility);
sm_status sm_matching_save(const sm_matching* matching, const char* path);
sm_status sm_matching_load(const char* path, const sm_instance* inst,
                           sm_matching** out);

/* ---- mechanisms --------------------------------------------------------- */

/* mechanism: "g-dac", "g-rdac" or "gsg-rdac". trace_path may be NULL.
 * rounds may be NULL. */
sm_status sm_run_mechanism(const sm_instance* inst, const char* mechanism,
                           double epsilon, const char* trace_path,
                           sm_matching** out, long* rounds);

/* Exhaustive enumeration (markets up to 4x4): returns the member of the
 * equilibrium set that is Pareto-optimal for PUs. */
sm_status sm_solve_brute_force(const sm_instance* inst, sm_matching** out);

/* ---- verification ------------------------------------------------------- */

/* Checks the matching against the stability conditions. verdict gets 1/0.
 * When report is non-NULL it receives a human-readable certificate
 * (per-SU bounds and violations); free it with sm_string_free. use_gs != 0
 * verifies against the guess-based transfer curves instead of the exact
 * ones. */
sm_status sm_verify(const sm_instance* inst, const sm_matching* matching,
                    int use_gs, double tol, int* verdict, char** report);

void sm_string_free(char* text);

/* ---- fixed-preference deferred acceptance ------------------------------- */

/* Classic deferred acceptance over ordinal lists. pu_prefs is the
 * concatenation of the per-PU lists (lengths in pu_pref_len), best first;
 * su_prefs likewise. su_proposes selects the proposing side. pu_to_su_out
 * must hold pu_count ints; unmatched PUs get -1. */
sm_status sm_fixed_da(int pu_count, int su_count, const int* pu_prefs,
                      const int* pu_pref_len, const int* su_prefs,
                      const int* su_pref_len, int su_proposes, int* pu_to_su_out);

/* ---- experiment sweeps -------------------------------------------------- */

/* Runs the configured (M, N, seed, mechanism) grid and writes the row-level
 * and summary CSVs. jobs > 0 overrides the config's parallelism. */
sm_status sm_run_sweep(const char* config_path, const char* rows_csv_path,
                       const char* summary_csv_path, int jobs);

/* The built-in defaults rendered as a config file; free with
 * sm_string_free. */
sm_status sm_default_config(char** text);

#ifdef __cplusplus
}
#endif

#endif /* SPECMATCH_H */
