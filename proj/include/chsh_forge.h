#ifndef CHSH_FORGE_H
#define CHSH_FORGE_H

/* C interface to the CHSH forge core: LHV models over finite hidden-variable
 * spaces, exact and empirical CHSH evaluation, pool drawing and selection,
 * non-local stitching, and the random-search falsification hunt.
 *
 * Conventions:
 *   - Every function returning int is a status code (CHSHF_OK on success).
 *   - On failure, chshf_last_error() returns a message describing what went
 *     wrong on the calling thread; the pointer stays valid until the next
 *     chshf_* call on that thread.
 *   - Output strings (char**) are heap-allocated; release them with
 *     chshf_string_free(). Output parameters are untouched on failure.
 *   - Setting pairs are indexed 0..3 in the fixed order a1b1, a1b2, a2b1,
 *     a2b2. The CHSH combination is E0 - E1 - E2 - E3.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
    CHSHF_OK = 0,
    CHSHF_ERR_INVALID_ARGUMENT = 1, /* null pointer or out-of-range scalar */
    CHSHF_ERR_PARSE = 2,            /* malformed JSON or wrong field types */
    CHSHF_ERR_IO = 3,               /* file could not be read */
    CHSHF_ERR_DOMAIN = 4,           /* precondition violated (bad setting, empty pool, ...) */
    CHSHF_ERR_BOUND = 5,            /* |S| beyond the LHV bound: falsification signal */
    CHSHF_ERR_INTERNAL = 6
};

typedef struct chshf_model chshf_model;

/* Library version, static storage. */
const char* chshf_version(void);

/* Message for the most recent failure on this thread; "" if none yet. */
const char* chshf_last_error(void);

void chshf_string_free(char* s);

/* ---- model lifecycle ---- */

/* Parse a model document from a JSON string. The document must be
 * structurally sound (shapes consistent); semantic checks are separate,
 * via chshf_model_validate. */
int chshf_model_parse(const char* json, chshf_model** out);

int chshf_model_from_file(const char* path, chshf_model** out);

void chshf_model_free(chshf_model* m);

/* Serialize back to the document format. indent < 0 gives compact output. */
int chshf_model_dump(const chshf_model* m, int indent, char** out_json);

/* Full invariant report as JSON; *out_ok is 1 when every check passed. */
int chshf_model_validate(const chshf_model* m, char** out_report_json, int* out_ok);

/* ---- exact evaluation ---- */

/* S from the four quartet correlations. Fails with CHSHF_ERR_BOUND if the
 * value lands outside [-2 - 1e-12, 2 + 1e-12]. */
int chshf_model_chsh(const chshf_model* m, double* out_s);

/* S as the rho-weighted mean of the per-point integrand: the independent
 * combined-integral route. No bound check. */
int chshf_model_chsh_integrand(const chshf_model* m, double* out_s);

/* The four quartet correlations in pair order. */
int chshf_model_correlations(const chshf_model* m, double out_e[4]);

/* E(a, b) for explicit setting names anywhere in the universe. */
int chshf_model_correlation(const chshf_model* m, const char* alice_setting,
                            const char* bob_setting, double* out_e);

/* Full verification report: correlations, S via both routes, per-point
 * integrand table, factorization diagnostics at `factor_tol`. */
int chshf_model_verify_json(const chshf_model* m, double factor_tol, char** out_json);

/* ---- experiments ---- */

/* Event-by-event run, n_per_pair trials at each quartet pair (blocked
 * schedule), lambda re-drawn each trial. Either output may be NULL when not
 * wanted: *out_report_json gets the exact-vs-empirical report,
 * *out_trials_csv the "n,pair,a_out,b_out" log. */
int chshf_model_estimate(const chshf_model* m, uint64_t n_per_pair, uint64_t seed,
                         char** out_report_json, char** out_trials_csv);

/* Repeated finite-N experiments: fraction of runs whose |s_hat| exceeds 2.
 * The report carries the exact S for contrast. */
int chshf_model_fluctuation(const chshf_model* m, uint64_t n_per_pair, uint64_t runs,
                            uint64_t seed, char** out_report_json);

/* ---- pools, selection, stitching ---- */

/* Draw n_trials random models (uniform random pair schedule) on independent
 * substreams of master_seed and summarize one per line: JSON-lines with
 * trial_index, pair, seed, quartet correlations, chsh. */
int chshf_pool_manifest(uint64_t master_seed, uint64_t n_trials, size_t space_size,
                        char** out_jsonl);

/* Draw a pool and pick, per quartet pair, the earliest trial whose own-pair
 * correlation is within tol of the singlet targets (+1/sqrt2, -1/sqrt2,
 * -1/sqrt2, -1/sqrt2). *out_complete is 1 when all four pairs matched. The
 * report lists matches, missing pairs, and, when complete, the stitched
 * evaluation of the four selected models. */
int chshf_pool_select(uint64_t master_seed, uint64_t n_trials, size_t space_size,
                      double tol, char** out_report_json, int* out_complete);

/* Build the four target models directly (no pool), stitch them, and report
 * the component table next to S*. extremal = 0 uses the singlet targets
 * (S* = 2*sqrt(2)); extremal = 1 uses (+1, -1, -1, -1) (S* = 4). */
int chshf_stitch_demo(int extremal, char** out_report_json);

/* ---- search ---- */

/* All 16 deterministic single-point strategies with exact integer S. */
int chshf_enumerate_json(char** out_json);
int chshf_enumerate_csv(char** out_csv);

/* Mass random search for a bound violation: count models of the given space
 * size on substreams of master_seed, fanned out over `threads` (0 = all
 * hardware threads) in chunks of chunk_size (0 = default). *out_violations
 * counts |S| > 2 + 1e-9 hits; when nonzero, *out_falsification_json (if
 * non-NULL) receives the offending model, otherwise it is set to NULL. */
int chshf_hunt(uint64_t master_seed, uint64_t count, size_t space_size, int threads,
               uint64_t chunk_size, char** out_report_json, char** out_falsification_json,
               uint64_t* out_violations);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CHSH_FORGE_H */
