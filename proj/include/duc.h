/* C interface to the distributed unit-commitment solver.
 *
 * All functions returning duc_status set a thread-local error message
 * retrievable with duc_last_error() on failure. Handles are opaque and
 * owned by the caller; free them with the matching *_free function.
 */
#ifndef DUC_H
#define DUC_H

#include <stdint.h>

#if defined(_WIN32)
#define DUC_API __declspec(dllexport)
#else
#define DUC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum duc_status {
    DUC_OK = 0,
    DUC_ERR_INVALID_ARG = 1,
    DUC_ERR_PARSE = 2,
    DUC_ERR_VALIDATION = 3,
    DUC_ERR_IO = 4,
    DUC_ERR_TOO_LARGE = 5,
    DUC_ERR_SOLVER = 6,
    DUC_ERR_INTERNAL = 7
} duc_status;

typedef struct duc_instance duc_instance;
typedef struct duc_config duc_config;
typedef struct duc_report duc_report;

DUC_API const char* duc_version(void);
DUC_API const char* duc_last_error(void);

DUC_API duc_status duc_instance_load(const char* path, duc_instance** out);
DUC_API duc_status duc_instance_generate(int units, int horizon, int scenarios, uint64_t seed,
                                         duc_instance** out);
DUC_API duc_status duc_instance_save(const duc_instance* inst, const char* path);
DUC_API duc_status duc_instance_deterministic_view(const duc_instance* inst,
                                                   duc_instance** out);
DUC_API void duc_instance_free(duc_instance* inst);
DUC_API int duc_instance_units(const duc_instance* inst);
DUC_API int duc_instance_horizon(const duc_instance* inst);
DUC_API int duc_instance_scenarios(const duc_instance* inst);

/* A config starts from the solver defaults. Keys accepted by duc_config_set:
 * mode, backend, rho, rho_commit, rho_startup, rho_shutdown, beta,
 * beta_commit, beta_startup, beta_shutdown, eps, eps_primal, eps_dual,
 * max_iter, batches, unit_coherent, depth, lr, dvqe_iters, shots, seed,
 * kappa, track_match, gamma_logic, gamma_ss, gamma_start_on, gamma_stop_off,
 * gamma_anchor_commit, gamma_anchor_startup, gamma_anchor_shutdown,
 * qp_eps_abs, qp_eps_rel, qp_max_iters. */
DUC_API duc_status duc_config_create(duc_config** out);
DUC_API void duc_config_free(duc_config* cfg);
DUC_API duc_status duc_config_set(duc_config* cfg, const char* key, const char* value);

/* Runs the solver. When out_dir is non-NULL, writes trace.csv, dispatch.csv,
 * schedule.csv and manifest.json there. Returns DUC_OK for a converged run
 * and also for a clean max-iteration stop (query duc_report_converged). */
DUC_API duc_status duc_solve(const duc_instance* inst, const duc_config* cfg,
                             const char* out_dir, duc_report** out);
/* Re-runs a previously written manifest, reproducing its outputs. */
DUC_API duc_status duc_solve_manifest(const char* manifest_path, duc_report** out);

DUC_API int duc_report_converged(const duc_report* rep);
DUC_API int duc_report_iterations(const duc_report* rep);
DUC_API double duc_report_final_cost(const duc_report* rep);
/* which: 0 commit, 1 startup, 2 shutdown primal norms; 3 dual norm. */
DUC_API double duc_report_residual(const duc_report* rep, int which);
DUC_API double duc_report_match_rate(const duc_report* rep);
DUC_API double duc_report_wall_ms(const duc_report* rep);
DUC_API int duc_report_commit(const duc_report* rep, int unit, int t);

DUC_API void duc_report_free(duc_report* rep);

/* Side-by-side comparison of n configurations on one instance. The table is
 * returned as CSV text (free with duc_string_free) and written to
 * out_dir/compare.csv when out_dir is non-NULL. */
DUC_API duc_status duc_compare(const duc_instance* inst, const duc_config* const* cfgs,
                               const char* const* labels, int n, const char* out_dir,
                               char** csv_out);

/* Solves a QUBO text file (n header, "i j value" couplings, "i value" linear
 * terms, offset line) with the configured backend; returns the solve record. */
DUC_API duc_status duc_qubo_solve_file(const char* path, const duc_config* cfg,
                                       char** report_out);

DUC_API void duc_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DUC_H */
