/* winscrt: win statistics for cluster-randomized trials.
 *
 * C interface of the shared library. Datasets are opaque handles; every
 * call returns a status code and, on failure, fills the caller-provided
 * error buffer with a message. Reports are JSON strings allocated by the
 * library and released with winscrt_string_free().
 */
#ifndef WINSCRT_H
#define WINSCRT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WINSCRT_BUILD)
#    define WINSCRT_API __declspec(dllexport)
#  else
#    define WINSCRT_API __declspec(dllimport)
#  endif
#else
#  define WINSCRT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum winscrt_status {
  WINSCRT_OK = 0,
  WINSCRT_ERR_IO = 1,         /* file missing / unreadable / unwritable */
  WINSCRT_ERR_PARSE = 2,      /* malformed input data */
  WINSCRT_ERR_INVALID = 3,    /* invalid dataset, options, or arguments */
  WINSCRT_ERR_INFEASIBLE = 4, /* method cannot run on this data */
  WINSCRT_ERR_INTERNAL = 5
} winscrt_status;

typedef struct winscrt_dataset winscrt_dataset;

WINSCRT_API const char* winscrt_version(void);

/* Load a long-format event log (CSV header `clu,id,trt,t,st`). */
WINSCRT_API winscrt_status winscrt_dataset_from_csv(const char* path, winscrt_dataset** out,
                                                    char* errbuf, size_t errlen);
WINSCRT_API winscrt_status winscrt_dataset_from_string(const char* csv_text, winscrt_dataset** out,
                                                       char* errbuf, size_t errlen);
WINSCRT_API void winscrt_dataset_free(winscrt_dataset* d);

WINSCRT_API int winscrt_dataset_n_clusters(const winscrt_dataset* d);
WINSCRT_API int64_t winscrt_dataset_n_subjects(const winscrt_dataset* d);
WINSCRT_API int winscrt_dataset_components(const winscrt_dataset* d);

/* options_json keys (all optional unless noted):
 *   method      string, required: wald_score|wald_u|wald_jk|perm|fs|jel
 *   estimand    string, required: WD|WR|WO|DOOR
 *   null        number, original scale (defaults: 0, 1, 1, 0.5)
 *   alternative string: two.sided|greater|less   (default two.sided)
 *   alpha       number (default 0.05)
 *   use_t       bool: t(M-2) reference for the Wald tests and fs (default true)
 *   B           integer Monte Carlo permutation count (default 2000)
 *   seed        integer (default 0)
 *   rule        string: both-events|gehan (default both-events)
 *   exact       bool: enumerate all allocations (perm only)
 *   wr_bivariate bool: bivariate log(WR) variance for wald_score
 * The report JSON is documented in the README. */
WINSCRT_API winscrt_status winscrt_analyze(const winscrt_dataset* d, const char* options_json,
                                           char** report_json, char* errbuf, size_t errlen);

/* options_json keys: reps, B, alpha, seed, use_t, fs_use_t, workers,
 * procedures (array of method names), estimands (array), resume (bool). */
WINSCRT_API winscrt_status winscrt_simulate(const char* grid_csv_path, const char* out_dir,
                                            const char* options_json, char** summary_json,
                                            char* errbuf, size_t errlen);

/* options_json keys: scenario (object with the grid columns), target_pi_tie
 * (required), reps, tol, seed. */
WINSCRT_API winscrt_status winscrt_calibrate(const char* options_json, char** report_json,
                                             char* errbuf, size_t errlen);

WINSCRT_API void winscrt_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* WINSCRT_H */
