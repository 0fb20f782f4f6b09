/* seqmag — sequential weak-measurement magnetometry simulator.
 *
 * C API of the shared library. All entry points return SEQMAG_OK on success
 * or an error code; seqmag_last_error() describes the most recent failure on
 * the calling thread. Objects are opaque handles owned by the library and
 * released with the matching *_free call.
 */
#ifndef SEQMAG_H
#define SEQMAG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SEQMAG_OK 0
#define SEQMAG_EINVAL 1   /* bad parameter, key, or value */
#define SEQMAG_ERUNTIME 2 /* numerical failure, underflow, or I/O error */

typedef struct seqmag_config seqmag_config;
typedef struct seqmag_table seqmag_table;

const char* seqmag_version(void);
/* Last error message on this thread; empty string if none. */
const char* seqmag_last_error(void);
/* Worker threads for Monte Carlo loops; n <= 0 restores the default
 * (hardware concurrency, overridable via SEQMAG_THREADS). */
int seqmag_set_threads(int n);

/* --- configuration ------------------------------------------------------ */

/* preset: fig1_product, fig1_mixed, fig1_strong_coupling, fig2_M_sweep,
 * figdec_gamma_sweep, fig2si_ratio, fig3si_entanglement, custom. */
int seqmag_config_new(const char* preset, seqmag_config** out);
/* Flat key=value configuration; unknown keys fail with SEQMAG_EINVAL and an
 * error message naming the key. */
int seqmag_config_set(seqmag_config* cfg, const char* key, const char* value);
/* Loads "key = value" lines ('#' comments allowed). Keys set earlier through
 * seqmag_config_set win over file values; a duplicate key inside one source
 * is rejected. */
int seqmag_config_load_file(seqmag_config* cfg, const char* path);
int seqmag_config_set_seed(seqmag_config* cfg, uint64_t seed);
void seqmag_config_free(seqmag_config* cfg);

/* Newline-separated "name<TAB>description" listings;
 * what = "presets" | "config_keys" | "analytic_ops". */
int seqmag_catalog(const char* what, char* buf, size_t len, size_t* needed);

/* --- experiments -------------------------------------------------------- */

/* Runs the configured experiment preset into a result table. */
int seqmag_run(const seqmag_config* cfg, seqmag_table** out);
/* One experiment block per value of `parameter` (M, beta, k0Ts, gamma2, phi,
 * N_max), identical seeds across values. */
int seqmag_sweep(const seqmag_config* cfg, const char* parameter,
                 const double* values, size_t n_values, seqmag_table** out);
/* Single-trajectory checkpoint dump (log-likelihood bookkeeping). */
int seqmag_trajectory(const seqmag_config* cfg, seqmag_table** out);

/* --- analytics and self-checks ------------------------------------------ */

/* Evaluates a closed-form quantity by name from key/value arguments.
 * Writes up to cap values; *n_out reports how many the op produces. */
int seqmag_analytic_eval(const char* op, const char* const* keys,
                         const double* values, size_t n_args,
                         double* out_values, size_t cap, size_t* n_out);

/* Built-in oracle cross-checks (reduced-basis engine vs full-space engine,
 * exhaustive record enumeration at tiny N). Writes a human-readable report
 * (truncated to len-1 bytes) and sets *all_passed. */
int seqmag_validate(int max_m, char* report, size_t len, int* all_passed);

/* --- result tables ------------------------------------------------------ */

size_t seqmag_table_rows(const seqmag_table* t);
size_t seqmag_table_cols(const seqmag_table* t);
/* Comma-separated column names. */
const char* seqmag_table_header(const seqmag_table* t);
/* Numeric view of a cell; empty and non-numeric cells read as NaN. */
int seqmag_table_cell(const seqmag_table* t, size_t row, size_t col,
                      double* out);
/* Writes the table as CSV; path "-" selects stdout. */
int seqmag_table_write_csv(const seqmag_table* t, const char* path);
/* Copies the CSV text (truncated to len-1 bytes); *needed reports the full
 * size including the terminator. buf may be NULL to query the size. */
int seqmag_table_csv(const seqmag_table* t, char* buf, size_t len,
                     size_t* needed);
void seqmag_table_free(seqmag_table* t);

#ifdef __cplusplus
}
#endif

#endif /* SEQMAG_H */
