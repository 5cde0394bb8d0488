/*
 * C API of the bas library: surrogate modeling of expensive scalar functions
 * with high-dimensional inputs via Bayesian joint inference of a
 * low-dimensional orthonormal projection and a Gaussian-process link
 * function, plus the MO-AS and B-GP comparison methods.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return BAS_OK on success; on failure they return an error code
 * and leave a human-readable message retrievable with bas_last_error() on
 * the calling thread.
 */
#ifndef BAS_H
#define BAS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BAS_API __declspec(dllexport)
#else
#define BAS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bas_status {
  BAS_OK = 0,
  BAS_ERR_INVALID_ARGUMENT = 1,
  BAS_ERR_NUMERICAL = 2,
  BAS_ERR_DATA = 3,
  BAS_ERR_IO = 4,
  BAS_ERR_INTERNAL = 5
} bas_status;

typedef enum bas_method {
  BAS_METHOD_BAS = 0,
  BAS_METHOD_MOAS = 1,
  BAS_METHOD_BGP = 2
} bas_method;

typedef struct bas_dataset bas_dataset;
typedef struct bas_model bas_model;

/* Library version string (semver). */
BAS_API const char* bas_version(void);

/* Message of the last error raised on this thread; never NULL. */
BAS_API const char* bas_last_error(void);

/* Frees strings returned through char** out-parameters. */
BAS_API void bas_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* Random ridge quadratic benchmark: n inputs uniform on [-1,1]^d, responses
 * z^T A z + b^T z + c + noise with z the projection onto a Haar-random
 * m-dimensional subspace; analytic gradients are included. */
BAS_API bas_status bas_dataset_generate_quadratic(int32_t d, int32_t m,
                                                  int32_t n, double noise_std,
                                                  uint64_t seed,
                                                  bas_dataset** out);

/* Regenerate a dataset bit-identically from a spec file written by
 * bas_dataset_save_spec. */
BAS_API bas_status bas_dataset_from_spec_file(const char* spec_path,
                                              bas_dataset** out);

/* CSV with header x0,..,x{d-1},y[,g0,..,g{d-1}]. */
BAS_API bas_status bas_dataset_load_csv(const char* path, bas_dataset** out);
BAS_API bas_status bas_dataset_save_csv(const bas_dataset* ds,
                                        const char* path);

/* Persist the generator spec of a generated dataset (error for loaded
 * datasets). */
BAS_API bas_status bas_dataset_save_spec(const bas_dataset* ds,
                                         const char* path);

BAS_API int32_t bas_dataset_rows(const bas_dataset* ds);
BAS_API int32_t bas_dataset_dim(const bas_dataset* ds);
BAS_API int32_t bas_dataset_has_gradients(const bas_dataset* ds);
BAS_API const char* bas_dataset_name(const bas_dataset* ds);
BAS_API void bas_dataset_free(bas_dataset* ds);

/* ---- training ---------------------------------------------------------- */

typedef struct bas_train_config {
  bas_method method;
  int32_t m;       /* feature-space dimension */
  int32_t n_train; /* training rows taken from the dataset */
  uint64_t seed;   /* drives split, sampler, restarts, prediction pooling */
  int32_t chains;
  int32_t draws;
  int32_t warmup;
  double target_accept;
  int32_t max_tree_depth;
  int32_t moas_restarts;
  int32_t moas_max_iterations;
  int32_t bgp_n_grad;
  int32_t bgp_thin_draws;
  int32_t draws_per_sample;
} bas_train_config;

/* Fill a config with the defaults (4 chains x 1000 draws after 500 warmup,
 * 500 MO-AS restarts, 1000 B-GP gradient samples). */
BAS_API void bas_train_config_init(bas_train_config* cfg);

BAS_API bas_status bas_train(const bas_dataset* ds,
                             const bas_train_config* cfg, bas_model** out);

BAS_API bas_status bas_model_save(const bas_model* model, const char* path);
BAS_API bas_status bas_model_load(const char* path, bas_model** out);

/* JSON document with split-R^, acceptance rates, divergence counts (Bayesian
 * methods) or restart statistics (MO-AS); free with bas_string_free. */
BAS_API bas_status bas_model_diagnostics_json(const bas_model* model,
                                              char** out_json);

BAS_API double bas_model_training_seconds(const bas_model* model);
BAS_API int32_t bas_model_input_dim(const bas_model* model);
BAS_API void bas_model_free(bas_model* model);

/* ---- prediction and evaluation ----------------------------------------- */

/* Predictive summaries at n query points (row-major X, original units).
 * Each output array has length n; any of them may be NULL to skip. */
BAS_API bas_status bas_predict(const bas_model* model, const double* X,
                               int32_t n, int32_t d, double* median,
                               double* mean, double* stddev, double* q05,
                               double* q95);

typedef struct bas_metrics {
  double r_squared;
  double mlppd;
  double mfsa_rad; /* valid only when has_mfsa != 0 */
  int32_t has_mfsa;
  double training_seconds;
} bas_metrics;

/* Re-split the dataset with the model's stored seed (or split_seed_override
 * when >= 0) and score the validation block. MFSA requires dataset
 * gradients. */
BAS_API bas_status bas_evaluate(const bas_model* model, const bas_dataset* ds,
                                int64_t split_seed_override, bas_metrics* out);

/* ---- walkthrough ------------------------------------------------------- */

/* Run a walkthrough manifest (JSON) and write per-cell CSV artifacts under
 * out_dir. On success *cells_completed (when non-NULL) receives the number
 * of cells that finished. */
BAS_API bas_status bas_run_walkthrough(const char* manifest_path,
                                       const char* out_dir,
                                       int32_t* cells_completed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BAS_H */
