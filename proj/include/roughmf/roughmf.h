#ifndef ROUGHMF_H
#define ROUGHMF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RMF_API __declspec(dllexport)
#else
#define RMF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rmf_status {
  RMF_OK = 0,
  RMF_ERR_INVALID_INPUT = 1,
  RMF_ERR_INVALID_ELEMENT = 2,
  RMF_ERR_GRID_TOO_COARSE = 3,
  RMF_ERR_DIVERGENCE = 4,
  RMF_ERR_IO = 5,
  RMF_ERR_CHECK_FAILED = 6,
  RMF_ERR_INTERNAL = 7
} rmf_status;

typedef struct rmf_config rmf_config;
typedef struct rmf_path rmf_path;
typedef struct rmf_measure rmf_measure;

RMF_API const char* rmf_version(void);
/* Message of the last failed call on this thread ("" if none). */
RMF_API const char* rmf_last_error(void);
/* 0 ok, 1 validation, 2 numerical divergence, 3 failed check. */
RMF_API int rmf_exit_code(rmf_status status);
RMF_API rmf_status rmf_set_threads(int threads);

/* Config: flat key = value, defaults for every key. */
RMF_API rmf_status rmf_config_new(rmf_config** out);
RMF_API rmf_status rmf_config_load(const char* file, rmf_config** out);
RMF_API rmf_status rmf_config_set(rmf_config* cfg, const char* key,
                                  const char* value);
/* "key=value" */
RMF_API rmf_status rmf_config_set_assignment(rmf_config* cfg,
                                             const char* assignment);
/* Copies the value (NUL terminated) into buf if it fits; *needed gets the
   full length including the terminator. */
RMF_API rmf_status rmf_config_get(const rmf_config* cfg, const char* key,
                                  char* buf, size_t len, size_t* needed);
RMF_API rmf_status rmf_config_validate(const rmf_config* cfg);
RMF_API void rmf_config_free(rmf_config* cfg);

/* Runs a subcommand (lift, solve, fixed-point, finite, chaos, nu-cont, check,
   mgf). Nothing is written unless the config validates. summary may be NULL. */
RMF_API rmf_status rmf_run(const char* command, const rmf_config* cfg,
                           const char* out_dir, char* summary,
                           size_t summary_len);

/* Rough paths (step 2, based at the identity). points is row-major,
   n_points x dim; times may be NULL (uniform on [0, 1]). */
RMF_API rmf_status rmf_path_from_points(const double* points, size_t n_points,
                                        int dim, const double* times,
                                        rmf_path** out);
RMF_API rmf_status rmf_path_sample(const rmf_config* cfg, uint64_t index,
                                   rmf_path** out);
RMF_API size_t rmf_path_size(const rmf_path* path);
RMF_API int rmf_path_dim(const rmf_path* path);
/* lvl1 receives dim values, lvl2 dim*dim row-major; either may be NULL. */
RMF_API rmf_status rmf_path_value(const rmf_path* path, size_t k, double* lvl1,
                                  double* lvl2);
RMF_API rmf_status rmf_path_p_variation(const rmf_path* path, double p,
                                        double* out);
RMF_API rmf_status rmf_path_m_alpha(const rmf_path* path, double p,
                                    double alpha, double* out);
RMF_API rmf_status rmf_path_rho(const rmf_path* a, const rmf_path* b, double p,
                                double* out);
RMF_API rmf_status rmf_path_pvar_bound(const rmf_path* path, double p,
                                       double alpha, double* lhs, double* rhs,
                                       int* holds);
RMF_API void rmf_path_free(rmf_path* path);

/* Empirical path measures. */
RMF_API rmf_status rmf_measure_fixed_point(const rmf_config* cfg,
                                           rmf_measure** out, int* iterations,
                                           int* converged);
RMF_API rmf_status rmf_measure_particles(const rmf_config* cfg, size_t n,
                                         uint64_t seed, rmf_measure** out);
RMF_API rmf_status rmf_measure_load(const char* file, rmf_measure** out);
RMF_API rmf_status rmf_measure_save(const rmf_measure* mu, const char* file);
RMF_API size_t rmf_measure_size(const rmf_measure* mu);
RMF_API size_t rmf_measure_points(const rmf_measure* mu);
RMF_API int rmf_measure_state_dim(const rmf_measure* mu);
RMF_API rmf_status rmf_measure_state(const rmf_measure* mu, size_t atom,
                                     size_t k, double* out);
/* mode 0: same index, 1: optimal assignment */
RMF_API rmf_status rmf_measure_wasserstein(const rmf_measure* a,
                                           const rmf_measure* b, int mode,
                                           double p, double* out);
RMF_API rmf_status rmf_measure_marginal_wasserstein(const rmf_measure* a,
                                                    const rmf_measure* b,
                                                    size_t k, double* out);
RMF_API void rmf_measure_free(rmf_measure* mu);

#ifdef __cplusplus
}
#endif

#endif
