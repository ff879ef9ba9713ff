/*
 * C interface to the cvqkd engine: key rates, parameter optimization,
 * attenuation sweeps, protocol simulation and invariant verification for a
 * binary-modulation all-heterodyne CV-QKD protocol under a Gaussian channel.
 *
 * All functions return a cvqkd_status code; on failure a human-readable
 * message is available from cvqkd_last_error() (thread local). Results are
 * opaque tables of named numeric columns plus an optional note per row.
 */
#ifndef CVQKD_H
#define CVQKD_H

#include <stddef.h>

#if defined(_WIN32)
#define CVQKD_API __declspec(dllexport)
#else
#define CVQKD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cvqkd_status {
    CVQKD_OK = 0,
    CVQKD_ERR_ARGUMENT = 1, /* null pointer or malformed call */
    CVQKD_ERR_KEY = 2,      /* unknown configuration key */
    CVQKD_ERR_DOMAIN = 3,   /* parameter failed validation */
    CVQKD_ERR_NUMERIC = 4,  /* numerical failure inside the engine */
    CVQKD_ERR_INTERNAL = 5
} cvqkd_status;

typedef struct cvqkd_opts cvqkd_opts;
typedef struct cvqkd_table cvqkd_table;

CVQKD_API const char* cvqkd_version(void);
CVQKD_API const char* cvqkd_status_name(int status);
/* Message for the most recent failing call on this thread ("" if none). */
CVQKD_API const char* cvqkd_last_error(void);

/* ---- configuration ----------------------------------------------------- */

CVQKD_API cvqkd_opts* cvqkd_opts_new(void);
CVQKD_API void cvqkd_opts_free(cvqkd_opts* opts);
/* Keys are dotted names, e.g. "protocol.mu", "channel.eta"; unknown keys are
 * rejected with CVQKD_ERR_KEY. */
CVQKD_API int cvqkd_opts_set(cvqkd_opts* opts, const char* key, double value);
CVQKD_API int cvqkd_opts_get(const cvqkd_opts* opts, const char* key, double* value);
CVQKD_API size_t cvqkd_known_key_count(void);
CVQKD_API const char* cvqkd_known_key_name(size_t index);

/* ---- runs --------------------------------------------------------------- */

/* Key-rate report at fixed parameters (single-row table). */
CVQKD_API int cvqkd_run_rate(const cvqkd_opts* opts, cvqkd_table** out);
/* Nelder-Mead optimization of (mu, p_sig, x_th, kappa, gamma) at one channel
 * point (single-row table). */
CVQKD_API int cvqkd_run_optimize(const cvqkd_opts* opts, cvqkd_table** out);
/* Optimized rate over an attenuation grid (one row per grid point; per-row
 * failures are recorded in the row note and do not abort the sweep). */
CVQKD_API int cvqkd_run_sweep(const cvqkd_opts* opts, cvqkd_table** out);
/* Monte Carlo of the protocol plus the finite-size report from the empirical
 * tallies (single-row table). */
CVQKD_API int cvqkd_run_simulate(const cvqkd_opts* opts, cvqkd_table** out);
/* Named invariant suite (one row per check; note = check name; the "passed"
 * column is 1/0). */
CVQKD_API int cvqkd_run_verify(const cvqkd_opts* opts, cvqkd_table** out);

/* Debug dump of the success POVM matrices as CSV files under dir. */
CVQKD_API int cvqkd_dump_operators(const cvqkd_opts* opts, const char* dir);

/* ---- results ------------------------------------------------------------ */

CVQKD_API void cvqkd_table_free(cvqkd_table* table);
CVQKD_API size_t cvqkd_table_rows(const cvqkd_table* table);
CVQKD_API size_t cvqkd_table_cols(const cvqkd_table* table);
CVQKD_API const char* cvqkd_table_col_name(const cvqkd_table* table, size_t col);
CVQKD_API double cvqkd_table_value(const cvqkd_table* table, size_t row, size_t col);
/* Note attached to a row ("" if none). */
CVQKD_API const char* cvqkd_table_row_note(const cvqkd_table* table, size_t row);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CVQKD_H */
