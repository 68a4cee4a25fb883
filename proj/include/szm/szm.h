#ifndef SZM_SZM_H
#define SZM_SZM_H

/* C interface to the Szasz-Mirakyan distribution function estimator.
 *
 * Every function that can fail returns an szm_status. On failure the message
 * is available from szm_last_error() on the calling thread until the next
 * failing call on that thread. Handles are opaque and owned by the caller;
 * each *_free accepts NULL. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SZM_API __declspec(dllexport)
#else
#define SZM_API __attribute__((visibility("default")))
#endif

typedef enum szm_status {
  SZM_OK = 0,
  SZM_ERR_DOMAIN = 1,     /* argument outside the mathematical domain */
  SZM_ERR_USAGE = 2,      /* invalid parameter or configuration */
  SZM_ERR_IO = 3,         /* unreadable or malformed file, write failure */
  SZM_ERR_INTERNAL = 4
} szm_status;

typedef struct szm_sample szm_sample;
typedef struct szm_config szm_config;
typedef struct szm_selection szm_selection;
typedef struct szm_points szm_points;
typedef struct szm_checks szm_checks;

SZM_API const char* szm_last_error(void);
SZM_API const char* szm_version(void);

/* ---- samples ---------------------------------------------------------- */

/* Delimited text, one observation per row; header and '#' comments allowed. */
SZM_API szm_status szm_sample_load(const char* path, szm_sample** out);
/* Copies n*d row-major values. */
SZM_API szm_status szm_sample_create(size_t n, size_t d, const double* values, szm_sample** out);
/* Draws n observations from a named model ("m1", "m2", "exp") whose
 * parameters are taken from the config (d, alpha, beta, theta). */
SZM_API szm_status szm_sample_draw(const szm_config* config, const char* model, uint64_t seed,
                                   size_t n, szm_sample** out);
SZM_API void szm_sample_free(szm_sample* sample);
SZM_API size_t szm_sample_size(const szm_sample* sample);
SZM_API size_t szm_sample_dim(const szm_sample* sample);
/* Row-major n*d view, valid while the sample lives. */
SZM_API const double* szm_sample_data(const szm_sample* sample);

/* ---- estimators ------------------------------------------------------- */

SZM_API szm_status szm_ecdf(const szm_sample* sample, const double* x, double* out);
/* m holds d positive smoothing levels. */
SZM_API szm_status szm_estimate(const szm_sample* sample, const int64_t* m, const double* x,
                                double* out);
/* count points, row-major count*d; writes count values. */
SZM_API szm_status szm_estimate_many(const szm_sample* sample, const int64_t* m,
                                     const double* points, size_t count, double* out);
SZM_API szm_status szm_ecdf_many(const szm_sample* sample, const double* points, size_t count,
                                 double* out);
/* P(Poi(lambda) >= k). */
SZM_API szm_status szm_poisson_tail(double lambda, int64_t k, double* out);

/* ---- configuration ---------------------------------------------------- */

SZM_API szm_status szm_config_create(szm_config** out);
/* Flat "key = value" file; '#' starts a comment. */
SZM_API szm_status szm_config_load(const char* path, szm_config** out);
SZM_API void szm_config_free(szm_config* config);
SZM_API szm_status szm_config_set(szm_config* config, const char* key, const char* value);
/* Writes the value as text. *needed (optional) receives the length plus one;
 * the value is truncated when buflen is too small. */
SZM_API szm_status szm_config_get(const szm_config* config, const char* key, char* buf,
                                  size_t buflen, size_t* needed);
SZM_API szm_status szm_config_validate(const szm_config* config);
SZM_API size_t szm_config_key_count(void);
SZM_API const char* szm_config_key_name(size_t i);
SZM_API const char* szm_config_key_description(size_t i);

/* ---- grids ------------------------------------------------------------ */

/* QMC grid over [delta, 1/delta)^d using the config's delta, G, qmc_kind and
 * scramble settings. */
SZM_API szm_status szm_grid_create(const szm_config* config, size_t d, szm_points** out);
SZM_API void szm_points_free(szm_points* points);
SZM_API size_t szm_points_count(const szm_points* points);
SZM_API size_t szm_points_dim(const szm_points* points);
SZM_API const double* szm_points_data(const szm_points* points);

/* ---- smoothing selection ---------------------------------------------- */

/* Least-squares cross-validation over the config's grid and search domain. */
SZM_API szm_status szm_select_m(const szm_sample* sample, const szm_config* config,
                                szm_selection** out);
SZM_API void szm_selection_free(szm_selection* selection);
SZM_API size_t szm_selection_dim(const szm_selection* selection);
SZM_API const int64_t* szm_selection_m_star(const szm_selection* selection);
SZM_API double szm_selection_score(const szm_selection* selection);
SZM_API size_t szm_selection_trace_size(const szm_selection* selection);
/* Step k of the search: pass (0 = isotropic pilot), coordinate (-1 for the
 * pilot), the d-vector visited and its score. Any output may be NULL. */
SZM_API szm_status szm_selection_trace_step(const szm_selection* selection, size_t k, int* pass,
                                            int* coordinate, int64_t* m, double* score);

/* ---- experiments ------------------------------------------------------ */

/* Called once per finished replication, in replication order. */
typedef void (*szm_progress_fn)(const char* model, size_t n, size_t rep, void* user);

/* Runs the full Monte Carlo experiment described by the config, writing
 * raw_log.csv, summary_<model>.csv, figure_<model>.csv and mstar.csv to
 * out_dir. */
SZM_API szm_status szm_simulate(const szm_config* config, szm_progress_fn progress, void* user);
/* Recomputes the summary files from an existing raw log. */
SZM_API szm_status szm_tables(const char* raw_log, const char* out_dir);

/* ---- validation ------------------------------------------------------- */

SZM_API size_t szm_suite_count(void);
SZM_API const char* szm_suite_name(size_t i);
/* threads = 0 uses SZM_THREADS or the hardware concurrency; reps_scale
 * multiplies Monte Carlo replication counts (1 = full size). A failing check
 * is not an error: inspect szm_checks_all_pass. */
SZM_API szm_status szm_validate(const char* suite, uint64_t seed, unsigned threads,
                                double reps_scale, szm_checks** out);
SZM_API void szm_checks_free(szm_checks* checks);
SZM_API size_t szm_checks_count(const szm_checks* checks);
SZM_API szm_status szm_check_get(const szm_checks* checks, size_t i, const char** name,
                                 double* predicted, double* observed, double* tolerance,
                                 int* pass);
SZM_API int szm_checks_all_pass(const szm_checks* checks);

#ifdef __cplusplus
}
#endif

#endif
