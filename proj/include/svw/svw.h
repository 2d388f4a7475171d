#ifndef SVW_SVW_H_
#define SVW_SVW_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SVW_API __declspec(dllexport)
#else
#define SVW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every call returns one; the message of the last failure on
 * the calling thread is available from svw_last_error(). */
typedef enum svw_status {
  SVW_OK = 0,
  SVW_INVALID_PARAMETER = 1,
  SVW_CONFIG_INVALID = 2,
  SVW_IO_ERROR = 3,
  SVW_CFL_VIOLATION = 4,
  SVW_GRID_MISMATCH = 5,
  SVW_ITERATION_FAILURE = 6,
  SVW_EMPTY_WINDOW = 7,
  SVW_RUNTIME_ERROR = 8,
  SVW_NULL_ARGUMENT = 9,
  SVW_BUFFER_TOO_SMALL = 10
} svw_status;

typedef struct svw_config svw_config;
typedef struct svw_sim svw_sim;

SVW_API const char* svw_version(void);
SVW_API const char* svw_status_string(svw_status status);
/* Message of the last failed call on this thread ("" if none). */
SVW_API const char* svw_last_error(void);

/* ---- configuration ---- */

SVW_API svw_status svw_config_load(const char* path, svw_config** out);
/* base_dir resolves relative file paths inside the JSON; may be NULL. */
SVW_API svw_status svw_config_parse(const char* json, const char* base_dir, svw_config** out);
SVW_API svw_status svw_config_clone(const svw_config* config, svw_config** out);
SVW_API void svw_config_free(svw_config* config);

SVW_API svw_status svw_config_set_seed(svw_config* config, uint64_t seed);
SVW_API svw_status svw_config_set_paths(svw_config* config, int paths);
SVW_API svw_status svw_config_set_workers(svw_config* config, int workers);
SVW_API svw_status svw_config_grid_size(const svw_config* config, int* n);

/* 16 hex digits plus the terminator. */
SVW_API svw_status svw_config_hash(const svw_config* config, char out[17]);
/* Canonical JSON. *needed receives the size including the terminator; a
 * NULL or short buffer yields SVW_BUFFER_TOO_SMALL. */
SVW_API svw_status svw_config_to_json(const svw_config* config, char* buffer, size_t capacity,
                                      size_t* needed);

/* ---- batch runs (out_dir may be NULL or "" to skip writing files) ---- */

typedef struct svw_run_result {
  double t_final;
  double E0;
  double E_T;
  double D_T;
  double M_T;
  double max_abs_residual;
  double sup_abs_theta;
  int exploded;
  double blowup_time; /* NaN when none */
} svw_run_result;

SVW_API svw_status svw_run(const svw_config* config, const char* out_dir,
                           svw_run_result* result);

typedef struct svw_ensemble_result {
  int paths;
  int exploded;
  double E0;
  double q_integral;
  double t_end;
  double mean_E_T;
  double se_E_T;
  double max_abs_residual; /* over surviving paths */
} svw_ensemble_result;

SVW_API svw_status svw_ensemble(const svw_config* config, const char* out_dir,
                                svw_ensemble_result* result);

typedef struct svw_blowup_params {
  const double* eps;
  size_t eps_count;
  double alpha;
  double nu;
  double gamma;
  double u_star;
  int has_x0;
  double x0;
  int paths;
} svw_blowup_params;

/* Defaults: eps {0.4, 0.2, 0.1}, alpha 1.5, nu 0.25, gamma 0.4, u* 0,
 * steepest bump point, 200 paths. */
SVW_API void svw_blowup_defaults(svw_blowup_params* params);

typedef struct svw_blowup_row {
  double eps;
  double horizon;
  double riccati_time;
  double deterministic_time; /* NaN when none */
  int paths;
  int blowups;
  double fraction;
  double wilson_lo;
  double wilson_hi;
} svw_blowup_row;

/* rows may be NULL; otherwise it must hold eps_count entries. */
SVW_API svw_status svw_blowup(const svw_config* config, const svw_blowup_params* params,
                              const char* out_dir, svw_blowup_row* rows);

typedef struct svw_converge_result {
  double theta_slope;
  double theta_slope_se;
  double lp_variation;
} svw_converge_result;

/* paths <= 0 uses the paths of the config. */
SVW_API svw_status svw_converge(const svw_config* config, const double* eps, size_t eps_count,
                                int paths, const char* out_dir, svw_converge_result* result);

/* ---- single path stepping ---- */

typedef enum svw_field { SVW_FIELD_R = 0, SVW_FIELD_S = 1, SVW_FIELD_U = 2 } svw_field;

typedef struct svw_ledger {
  double t;
  double E;
  double D;
  double M;
  double residual;
  double max_abs_residual;
} svw_ledger;

SVW_API svw_status svw_sim_create(const svw_config* config, int path, svw_sim** out);
SVW_API void svw_sim_free(svw_sim* sim);
/* Advances up to `steps` steps, stopping early at the final time or on
 * explosion. *taken (may be NULL) receives the number performed. */
SVW_API svw_status svw_sim_step(svw_sim* sim, int steps, int* taken);
SVW_API svw_status svw_sim_time(const svw_sim* sim, double* t);
SVW_API svw_status svw_sim_finished(const svw_sim* sim, int* finished);
SVW_API svw_status svw_sim_exploded(const svw_sim* sim, int* exploded);
SVW_API svw_status svw_sim_grid_size(const svw_sim* sim, int* n);
SVW_API svw_status svw_sim_theta(const svw_sim* sim, double* theta);
/* Copies n values; count must be at least the grid size. */
SVW_API svw_status svw_sim_get_field(const svw_sim* sim, svw_field field, double* out,
                                     size_t count);
SVW_API svw_status svw_sim_ledger(const svw_sim* sim, svw_ledger* out);

#ifdef __cplusplus
}
#endif

#endif /* SVW_SVW_H_ */
