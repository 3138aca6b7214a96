/* C interface to the one-shot device estimation library.
 *
 * Every handle is opaque and owned by the caller; release it with the
 * matching *_free function. Functions return an osd_status; on failure the
 * message for the calling thread is available from osd_last_error(). Strings
 * returned through char** are heap allocated and released with
 * osd_string_free(). */
#ifndef ONESHOT_ONESHOT_H
#define ONESHOT_ONESHOT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OSD_API __declspec(dllexport)
#else
#define OSD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum osd_status {
  OSD_OK = 0,
  OSD_INVALID_ARGUMENT = 1,
  OSD_PARSE_ERROR = 2,
  OSD_NO_INTERIOR_DATA = 3,
  OSD_SINGULAR_INFORMATION = 4,
  OSD_DEGENERATE_VARIANCE = 5,
  OSD_INFEASIBLE_DESIGN = 6,
  OSD_UNSUPPORTED = 7,
  OSD_INTERNAL = 8
} osd_status;

typedef struct osd_plan osd_plan;
typedef struct osd_table osd_table;
typedef struct osd_multi osd_multi;
typedef struct osd_fit osd_fit;
typedef struct osd_sim osd_sim;

typedef struct osd_solver_config {
  int max_iters;
  double grad_tol;
  double step_tol;
  int grid_init;
} osd_solver_config;

typedef struct osd_ztest_result {
  double statistic;
  double p_value;
  double variance; /* m' Sigma m */
  double critical_value;
  int rejects;
} osd_ztest_result;

/* Stable identifier such as "ParseError"; "OK" for OSD_OK. */
OSD_API const char* osd_status_name(osd_status status);
/* Message of the last failed call on this thread; empty if none. */
OSD_API const char* osd_last_error(void);
OSD_API void osd_string_free(char* s);
OSD_API const char* osd_version(void);

OSD_API void osd_solver_config_default(osd_solver_config* config);

/* Parses "0:0.1:1,2,3" style lists; release values with osd_values_free. */
OSD_API osd_status osd_parse_number_list(const char* text, double** values,
                                         size_t* count);
OSD_API void osd_values_free(double* values);

/* Plans. devices is row-major I x J. */
OSD_API osd_status osd_plan_create(size_t stress_count, const double* stresses,
                                   size_t time_count, const double* times,
                                   const int64_t* devices, osd_plan** out);
OSD_API void osd_plan_free(osd_plan* plan);
OSD_API size_t osd_plan_stress_count(const osd_plan* plan);
OSD_API size_t osd_plan_time_count(const osd_plan* plan);

/* Failure tables. */
OSD_API osd_status osd_table_read_csv(const char* path, osd_table** out);
OSD_API osd_status osd_table_create(const osd_plan* plan,
                                    const int64_t* failures, osd_table** out);
OSD_API void osd_table_free(osd_table* table);
/* Copy of the table's test plan. */
OSD_API osd_status osd_table_plan(const osd_table* table, osd_plan** out);
OSD_API osd_status osd_table_to_json(const osd_table* table, char** out);

/* Model quantities at (alpha0, alpha1). */
OSD_API osd_status osd_reliability(double alpha0, double alpha1, double w,
                                   double t, double* out);
OSD_API osd_status osd_mean_lifetime(double alpha0, double alpha1, double w,
                                     double* out);

/* Estimation. config may be NULL for defaults. */
OSD_API osd_status osd_fit_table(const osd_table* table, double beta,
                                 const osd_solver_config* config,
                                 osd_fit** out);
/* Warm-started fits over ascending betas; out must hold count handles. */
OSD_API osd_status osd_fit_path(const osd_table* table, const double* betas,
                                size_t count, const osd_solver_config* config,
                                osd_fit** out);
OSD_API void osd_fit_free(osd_fit* fit);
OSD_API osd_status osd_fit_params(const osd_fit* fit, double* alpha0,
                                  double* alpha1);
OSD_API int osd_fit_converged(const osd_fit* fit);
/* Sandwich covariance, row-major 2x2. */
OSD_API osd_status osd_fit_covariance(const osd_fit* fit, double sigma[4]);
OSD_API osd_status osd_fit_to_json(const osd_fit* fit, char** out);

/* Inference. */
OSD_API osd_status osd_ztest(const osd_fit* fit, const osd_table* table,
                             double m0, double m1, double d, double level,
                             osd_ztest_result* out);
OSD_API osd_status osd_power(double alpha0, double alpha1, const osd_plan* plan,
                             double beta, double m0, double m1, double d,
                             int64_t devices, double level, int abs_effect,
                             double* out);
OSD_API osd_status osd_required_devices(double alpha0, double alpha1,
                                        const osd_plan* plan, double beta,
                                        double m0, double m1, double d,
                                        double target_power, double level,
                                        int64_t* out);

/* Competing risks: cause 1 natural death, cause 2 tumour death. */
OSD_API osd_status osd_multi_read_csv(const char* path, osd_multi** out);
OSD_API void osd_multi_free(osd_multi* data);
OSD_API osd_status osd_multi_cause_table(const osd_multi* data, int cause,
                                         osd_table** out);
/* JSON document with per-cause fits, mean lifetimes per stress level and the
 * combined mean lifetime, one entry per beta. */
OSD_API osd_status osd_competing_fit_json(const osd_multi* data,
                                          const double* betas, size_t count,
                                          const osd_solver_config* config,
                                          char** out);

/* Simulation studies described by a JSON request (see docs/formats.md). */
OSD_API osd_status osd_sim_parse(const char* json_text, osd_sim** out);
OSD_API void osd_sim_free(osd_sim* sim);
OSD_API int osd_sim_has_seed(const osd_sim* sim);
OSD_API void osd_sim_set_seed(osd_sim* sim, uint64_t seed);
OSD_API uint64_t osd_sim_seed(const osd_sim* sim);
OSD_API void osd_sim_set_threads(osd_sim* sim, unsigned threads);
OSD_API osd_status osd_sim_set_replications(osd_sim* sim, size_t replications);
/* Runs the study (or sweep). report_json receives the JSON report; curve_csv,
 * if not NULL, the plot-ready CSV. */
OSD_API osd_status osd_sim_run(const osd_sim* sim, char** report_json,
                               char** curve_csv);

#ifdef __cplusplus
}
#endif

#endif
