/* C interface to the pfo library. All handles are opaque; every call that can
 * fail returns a pfo_status and leaves a message in pfo_last_error(). */
#ifndef PFO_PFO_H
#define PFO_PFO_H

#include <stddef.h>
#include <stdint.h>

#if defined(PFO_BUILDING_LIBRARY)
#define PFO_API __attribute__((visibility("default")))
#else
#define PFO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pfo_status {
  PFO_OK = 0,
  PFO_ERR_INVALID_ARGUMENT = 1,
  PFO_ERR_DIMENSION_MISMATCH = 2,
  PFO_ERR_CONFIG = 3,
  PFO_ERR_IO = 4,
  PFO_ERR_FORMAT = 5,
  PFO_ERR_STREAM_EXHAUSTED = 6,
  PFO_ERR_UNSUPPORTED = 7,
  PFO_ERR_INTERNAL = 8
} pfo_status;

typedef enum pfo_set_kind {
  PFO_SET_COLUMN_L1_BALL = 0,
  PFO_SET_SIMPLEX = 1,
  PFO_SET_L2_BALL = 2
} pfo_set_kind;

typedef struct pfo_config pfo_config;
typedef struct pfo_result pfo_result;
typedef struct pfo_set pfo_set;

/* Message of the last failed call on this thread ("" if none). */
PFO_API const char* pfo_last_error(void);
PFO_API const char* pfo_status_name(pfo_status status);
PFO_API const char* pfo_version(void);

/* ---- configs ---------------------------------------------------------- */

PFO_API pfo_status pfo_config_load(const char* path, pfo_config** out);
PFO_API pfo_status pfo_config_parse(const char* text, pfo_config** out);
/* Applies "dotted.key=value" and revalidates; the config is unchanged on error. */
PFO_API pfo_status pfo_config_set(pfo_config* cfg, const char* assignment);
/* Copies the resolved output directory into buf (truncated, always terminated).
 * *needed receives the full length including the terminator when non-null. */
PFO_API pfo_status pfo_config_output_dir(const pfo_config* cfg, char* buf, size_t len, size_t* needed);
PFO_API void pfo_config_free(pfo_config* cfg);

/* ---- experiments ------------------------------------------------------ */

typedef struct pfo_run_info {
  const char* algorithm; /* owned by the result */
  uint64_t seed;
  int64_t rounds;
  double final_loss;
  double final_regret; /* NaN when no comparator exists */
  double median_round_ns;
} pfo_run_info;

typedef struct pfo_record {
  int64_t t;
  double loss;
  double cum_regret; /* NaN when absent */
  double est_error;  /* NaN when absent */
  double fw_gap;     /* NaN when absent */
  int64_t wall_time_ns;
} pfo_record;

/* Writes <ALGO>.csv and summary.json into the config's output directory.
 * out may be null when only the files are wanted. */
PFO_API pfo_status pfo_run(const pfo_config* cfg, pfo_result** out);
PFO_API size_t pfo_result_count(const pfo_result* res);
PFO_API pfo_status pfo_result_info(const pfo_result* res, size_t run, pfo_run_info* info);
PFO_API pfo_status pfo_result_record(const pfo_result* res, size_t run, int64_t t, pfo_record* rec);
PFO_API void pfo_result_free(pfo_result* res);

PFO_API pfo_status pfo_compare(const pfo_config* const* cfgs, size_t n, const char* out_path);
/* Solves x* per seed and caches comparator_seed<seed>.json in the output directory. */
PFO_API pfo_status pfo_solve_comparator(const pfo_config* cfg);

typedef void (*pfo_verify_callback)(const char* name, double value, double threshold, int passed,
                                    double seconds, void* user);
/* Runs the numerical checks, reporting each row; *failures counts failed rows. */
PFO_API pfo_status pfo_verify(int quick, pfo_verify_callback cb, void* user, int* failures);

/* ---- feasible sets ---------------------------------------------------- */

/* Points are rows x cols matrices stored column-major. */
PFO_API pfo_status pfo_set_create(pfo_set_kind kind, double radius, int64_t rows, int64_t cols,
                                  pfo_set** out);
PFO_API pfo_status pfo_set_lmo(const pfo_set* set, const double* direction, size_t len, double* out);
PFO_API pfo_status pfo_set_contains(const pfo_set* set, const double* point, size_t len, double tol,
                                    int* inside);
PFO_API pfo_status pfo_set_diameter(const pfo_set* set, double* out);
PFO_API void pfo_set_free(pfo_set* set);

#ifdef __cplusplus
}
#endif

#endif
