#ifndef RDA_RDA_H
#define RDA_RDA_H

#if defined(_WIN32)
#  if defined(RDA_BUILDING)
#    define RDA_API __declspec(dllexport)
#  else
#    define RDA_API __declspec(dllimport)
#  endif
#else
#  define RDA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rda_status {
    RDA_OK = 0,
    RDA_ERR_INVALID_ARGUMENT = 1,
    RDA_ERR_DEGENERATE_INTERFACE = 2,
    RDA_ERR_ROOT_FIND = 3,
    RDA_ERR_PROJECTION_DIVERGENCE = 4,
    RDA_ERR_MULTIPLE_ROOTS = 5,
    RDA_ERR_EMPTY_SIDE = 6,
    RDA_ERR_SIGMA_EXHAUSTED = 7,
    RDA_ERR_PATCH_INFEASIBLE = 8,
    RDA_ERR_RANK_DEFICIENT = 9,
    RDA_ERR_SINGULAR_B = 10,
    RDA_ERR_MISSING_RECONSTRUCTION = 11,
    RDA_ERR_NONPOSITIVE_PENALTY = 12,
    RDA_ERR_ORPHAN_FINE_DOF = 13,
    RDA_ERR_BREAKDOWN = 14,
    RDA_ERR_NONLINEAR_PRECONDITIONER = 15,
    RDA_ERR_INDEFINITE_LEVEL = 16,
    RDA_ERR_FACTORIZATION = 17,
    RDA_ERR_MISSING_EXACT = 18,
    RDA_ERR_CONFIG = 19,
    RDA_ERR_IO = 20,
    RDA_ERR_INTERNAL = 99
} rda_status;

/* Run configuration; starts from the built-in defaults. */
typedef struct rda_config rda_config;
/* Outcome of a single solve. */
typedef struct rda_result rda_result;

RDA_API const char *rda_version(void);
/* Stable lower-case name of a status code, e.g. "config". */
RDA_API const char *rda_status_name(rda_status status);
/* Message of the last failure on the calling thread; empty after a success. */
RDA_API const char *rda_last_error(void);

RDA_API rda_status rda_config_new(rda_config **out);
/* Strict INI parsing: unknown sections or keys fail with RDA_ERR_CONFIG. */
RDA_API rda_status rda_config_load(const char *path, rda_config **out);
RDA_API rda_status rda_config_parse(const char *text, rda_config **out);
/* key is "section.key", e.g. "mesh.h" with value "0.1, 0.05". */
RDA_API rda_status rda_config_set(rda_config *config, const char *key, const char *value);
/* Output directory from run.output. The pointer lives as long as the config. */
RDA_API const char *rda_config_output(const rda_config *config);
RDA_API void rda_config_free(rda_config *config);

/*
 * Table runners. Rows are written to csv_path as they are produced, so a
 * failing run leaves the finished rows behind. With echo != 0 rows are also
 * copied to stdout.
 */
RDA_API rda_status rda_run_convergence(const rda_config *config, const char *csv_path, int echo);
RDA_API rda_status rda_run_conditioning(const rda_config *config, const char *csv_path, int echo);
RDA_API rda_status rda_run_alpha_sweep(const rda_config *config, const char *csv_path, int echo);
RDA_API rda_status rda_run_lambda_sweep(const rda_config *config, const char *csv_path, int echo);

/*
 * One solve of degree m on mesh size h. When directory is non-NULL it
 * receives A_m.txt, A_0.txt, rhs.txt, solution.txt, residuals.csv and eigen.txt.
 */
RDA_API rda_status rda_solve(const rda_config *config, int degree, double h, const char *directory,
                             rda_result **out);
RDA_API long rda_result_dofs(const rda_result *result);
RDA_API int rda_result_iterations(const rda_result *result);
RDA_API int rda_result_converged(const rda_result *result);
RDA_API double rda_result_residual(const rda_result *result);
RDA_API double rda_result_energy_error(const rda_result *result);
RDA_API double rda_result_l2_error(const rda_result *result);
RDA_API double rda_result_seconds(const rda_result *result);
RDA_API void rda_result_free(rda_result *result);

#ifdef __cplusplus
}
#endif

#endif
