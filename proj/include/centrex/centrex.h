/* C interface of the centrex library. */
#ifndef CENTREX_CENTREX_H
#define CENTREX_CENTREX_H

#include <stddef.h>
#include <stdint.h>

#if defined(CENTREX_BUILDING_LIBRARY)
#define CENTREX_API __attribute__((visibility("default")))
#else
#define CENTREX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cx_status {
  CX_OK = 0,
  CX_ERR_ARGUMENT = 1, /* bad parameter or usage */
  CX_ERR_DATA = 2,     /* malformed config or dataset */
  CX_ERR_NUMERIC = 3,  /* singular covariance, underflow, rank deficiency */
  CX_ERR_IO = 4,
  CX_ERR_INTERNAL = 5
} cx_status;

typedef struct cx_dataset cx_dataset;
typedef struct cx_result cx_result;

/* Message of the last failed call on this thread; "" if none. */
CENTREX_API const char* cx_last_error(void);
CENTREX_API const char* cx_version(void);

/* Datasets. Matrices are column-major, one datum per column. */
/* `config_json` is a scenario object or an experiment config holding one.
   A non-null `seed_override` replaces the scenario seed. */
CENTREX_API cx_status cx_dataset_generate(const char* config_json, const uint64_t* seed_override,
                                          cx_dataset** out);
CENTREX_API cx_status cx_dataset_load(const char* csv_path, cx_dataset** out);
CENTREX_API cx_status cx_dataset_save(const cx_dataset* ds, const char* csv_path);
CENTREX_API void cx_dataset_free(cx_dataset* ds);
CENTREX_API int cx_dataset_m(const cx_dataset* ds);
CENTREX_API int cx_dataset_n(const cx_dataset* ds);
CENTREX_API int cx_dataset_k_true(const cx_dataset* ds);
/* Copies the m x N data; `len` must be at least m * N. */
CENTREX_API cx_status cx_dataset_data(const cx_dataset* ds, double* out, size_t len);
CENTREX_API cx_status cx_dataset_labels(const cx_dataset* ds, int* out, size_t len);

typedef struct cx_run_options {
  const char* algorithm; /* centrex, decentrex, kmeans, kmeans-aic, dbscan, dkmeans */
  uint64_t seed;
  int k;                   /* kmeans only; <= 0 uses the true K of the dataset */
  double eps;              /* dbscan; <= 0 uses the pairwise-distance quantile */
  int min_pts;             /* dbscan; <= 0 keeps the configured value */
  const char* config_path; /* optional experiment config supplying parameters */
} cx_run_options;

CENTREX_API void cx_run_options_init(cx_run_options* opts);
CENTREX_API cx_status cx_run(const cx_dataset* ds, const cx_run_options* opts, cx_result** out);
CENTREX_API void cx_result_free(cx_result* r);
CENTREX_API int cx_result_k_found(const cx_result* r);
/* NaN when the silhouette is undefined (a single group). */
CENTREX_API double cx_result_silhouette(const cx_result* r);
CENTREX_API double cx_result_correct_k(const cx_result* r);
CENTREX_API uint64_t cx_result_messages(const cx_result* r);
CENTREX_API double cx_result_runtime_seconds(const cx_result* r);
CENTREX_API int cx_result_has_ledger(const cx_result* r);
CENTREX_API cx_status cx_result_assignments(const cx_result* r, int* out, size_t len);
/* Copies the m x K compressed centroids. */
CENTREX_API cx_status cx_result_centroids(const cx_result* r, double* out, size_t len);
CENTREX_API cx_status cx_result_write_assignments(const cx_result* r, const char* path);
CENTREX_API cx_status cx_result_write_centroids(const cx_result* r, const char* path);
CENTREX_API cx_status cx_result_write_ledger(const cx_result* r, const char* path);

/* Runs the campaign described by a config file and writes its CSV to
   `out_csv_path`, or to <output_dir>/campaign.csv when it is null. */
CENTREX_API cx_status cx_campaign(const char* config_path, int threads, const char* out_csv_path);

/* Variance-inflation constant, read from or stored to $CENTREX_CACHE_DIR when set. */
CENTREX_API cx_status cx_r_squared(int m, double mu2, uint64_t samples, uint64_t seed, double* value,
                                   double* std_error);
CENTREX_API double cx_marcum_q(int m, double b);
CENTREX_API cx_status cx_wald_threshold(int m, double alpha, double* out);

#ifdef __cplusplus
}
#endif

#endif
