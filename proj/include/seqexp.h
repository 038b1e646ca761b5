/* seqexp — discounted Bayesian sequential decision problems: experimentation
 * gaps, the total-experimentation bound, tightness families, and one-arm
 * bandit cut-off analysis.
 *
 * C interface to the shared library. Every function that can fail returns a
 * status code; on failure an optional error string is written to *err
 * (release it with seqx_string_free). Output strings are heap-allocated and
 * must also be released with seqx_string_free.
 */

#ifndef SEQEXP_H
#define SEQEXP_H

#include <stdint.h>

#if defined(_WIN32)
#  if defined(SEQX_BUILD)
#    define SEQX_API __declspec(dllexport)
#  else
#    define SEQX_API __declspec(dllimport)
#  endif
#else
#  define SEQX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define SEQX_OK 0
#define SEQX_ERR_INVALID_ARGUMENT 1
#define SEQX_ERR_PARSE 2
#define SEQX_ERR_INFEASIBLE 3
#define SEQX_ERR_INTERNAL 4

SEQX_API const char* seqx_version(void);
SEQX_API const char* seqx_status_name(int status);
SEQX_API void seqx_string_free(char* s);

/* --- decision problems (JSON schema v1, see README) --- */

typedef struct seqx_problem seqx_problem;

SEQX_API int seqx_problem_from_json(const char* json, seqx_problem** out, char** err);
SEQX_API int seqx_problem_to_json(const seqx_problem* p, char** out_json, char** err);
SEQX_API void seqx_problem_free(seqx_problem* p);

/* Writes a JSON array of invariant violations (empty array when valid). */
SEQX_API int seqx_problem_validate(const seqx_problem* p, char** out_violations_json, char** err);

/* (E[highest reward] - E[lowest reward]) * discount / (1 - discount). */
SEQX_API int seqx_problem_theorem_bound(const seqx_problem* p, double* out, char** err);

/* --- canned analyses ---
 *
 * Each takes a JSON configuration object (the CLI flag set) and returns a
 * report JSON string; analyses with per-run output also return a CSV. The
 * report's "status" field encodes the outcome; map it to an exit code with
 * seqx_report_status_code.
 */

SEQX_API int seqx_run_prop1(const char* config_json, char** out_report, char** out_csv, char** err);
SEQX_API int seqx_run_prop2(const char* config_json, char** out_report, char** err);
SEQX_API int seqx_run_bandit(const char* config_json, char** out_report, char** out_csv, char** err);
SEQX_API int seqx_run_bandit_grid(const char* config_json, char** out_report, char** out_csv, char** err);
SEQX_API int seqx_run_simulate(const char* problem_json, const char* config_json, char** out_report,
                      char** out_csv, char** err);
SEQX_API int seqx_verify_report(const char* report_json, char** out_verdict, char** err);

/* 0 = all checks passed, 2 = a stated hypothesis is unmet, 3 = check failed. */
SEQX_API int seqx_report_status_code(const char* report_json, int* out_code, char** err);

/* Exports the revelation-family problem (m, delta) through the problem JSON
 * schema, so it can be fed back to seqx_run_simulate. */
SEQX_API int seqx_prop1_problem_json(int m, double delta, char** out_json, char** err);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SEQEXP_H */
