#ifndef HOPFLAB_H
#define HOPFLAB_H

/* C interface to the Hopf-surface bundle laboratory.
 *
 * All operations take a JSON request string and, on success, return a
 * heap-allocated JSON result string through `out`.  Every result object
 * carries a top-level `"schema": 1` field.  Strings returned through `out`
 * must be released with hopflab_free().
 *
 * A context holds the immutable surface geometry plus the last error
 * message; contexts are cheap and not thread-safe (use one per thread).
 *
 * Status codes double as process exit codes for the bundled CLI:
 *   0 success, 1 verification failure, 2 bad configuration,
 *   3 solver non-convergence, 4 internal error.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hopflab_status {
  HOPFLAB_OK = 0,
  HOPFLAB_ERR_VERIFY = 1,
  HOPFLAB_ERR_CONFIG = 2,
  HOPFLAB_ERR_NO_CONVERGENCE = 3,
  HOPFLAB_ERR_INTERNAL = 4
} hopflab_status;

typedef struct hopflab_ctx hopflab_ctx;

hopflab_ctx* hopflab_ctx_new(void);
void hopflab_ctx_free(hopflab_ctx* ctx);

/* Human-readable message for the most recent failing call on this context.
 * Owned by the context; valid until the next call. */
const char* hopflab_last_error(const hopflab_ctx* ctx);

/* Release a string returned through an `out` parameter. */
void hopflab_free(char* s);

/* Exact structural-identity suite.
 * Request: {} or {"corrupt": "<structure-equation name>"} (negative-control
 * hook: perturbs the named expected value so the suite must fail).
 * Result: {"schema":1, "all_pass":bool, "failures":int,
 *          "checks":[{"check_name","status","witness_text"}...]}.
 * Returns HOPFLAB_ERR_VERIFY when any check fails (result still written). */
hopflab_status hopflab_verify(hopflab_ctx* ctx, const char* request_json,
                              char** out);

/* Plus/minus degrees and alpha-degree of a line bundle.
 * Request: {"tau": >1, "alpha": (0,1), and one of
 *           "taupow": int   (exact integer power of tau)
 *           "eta": {"re":..,"im":..} or {"r":..,"theta":..} }
 * Result: {"schema":1, "deg_plus", "deg_minus", "alpha_degree",
 *          "exact":bool, "quadrature_deg_plus" (floating cross-check)}. */
hopflab_status hopflab_degree(hopflab_ctx* ctx, const char* request_json,
                              char** out);

/* Stability window and alpha-scan for the certified two-line families.
 * Request: {"family": "extension"|"bounded", parameters
 *           ("m_plus","m_minus") or ("deg_plus_l","m_minus"),
 *           optional "alpha_grid": {"lo","hi","step"}}
 * Result: {"schema":1, "alpha0": {"num","den","value"},
 *          "deg_total":[p,m], "deg_sub":[p,m],
 *          "scan":[{"alpha","mu_total","mu_sub","stable"}...],
 *          "flip_bracket":[a,b] or null}. */
hopflab_status hopflab_stability(hopflab_ctx* ctx, const char* request_json,
                                 char** out);

/* Scalar Hermite-Einstein solve on a line: find mean-zero k with
 * P_alpha k = lambda - k0 on the collocation grid.
 * Request: {"alpha", "tau", "grid_n" (even), "k0": [grid_n reals]}
 * Result: {"schema":1, "lambda", "residual_sup", "sigma_small",
 *          "sigma_next", "k":[...]}. */
hopflab_status hopflab_he_solve(hopflab_ctx* ctx, const char* request_json,
                                char** out);

/* Newton continuation for the weighted Hermite-Einstein metric on a rank-2
 * structure, with destabilizer extraction on blow-up.
 * Request: {"family": "crossed"|"triangular",
 *           crossed:    "eta","xi","a","b" (integers),
 *           triangular: "m_plus","m_minus",
 *           "alpha", optional "tau",
 *           optional solver block "solver":
 *             {"N","eps0","ratio","eps_min","newton_tol","blowup_cap"}}
 * Result: {"schema":1, "converged","blowup","failure","alpha","lambda",
 *          "m_k","invariant_ansatz":true,
 *          "steps":[{"eps","newton_iters","residual","m_eps","logdet",
 *                    "accepted","growth_bound_ok"}...],
 *          "final_he_residual","logdet_drift","certificate_residual",
 *          "destabilizer": {...} when blow-up}.
 * Returns HOPFLAB_ERR_NO_CONVERGENCE when the path neither reached eps_min
 * nor ended in a clean blow-up (partial trace still written). */
hopflab_status hopflab_continuity(hopflab_ctx* ctx, const char* request_json,
                                  char** out);

#ifdef __cplusplus
}
#endif

#endif /* HOPFLAB_H */
