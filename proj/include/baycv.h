/*
 * baycv: Bayesian comparison of systems evaluated by repeated k-fold
 * cross-validation over several datasets.
 *
 * C interface. Objects are opaque handles created by *_create / *_load /
 * *_assemble / bcv_fit and released by the matching *_free (passing NULL is
 * allowed). Every fallible call returns a bcv_status; on failure
 * bcv_last_error() describes the problem for the calling thread. Strings
 * returned by accessors stay valid until the owning handle is freed.
 */
#ifndef BAYCV_H
#define BAYCV_H

#include <stddef.h>
#include <stdint.h>

#if defined(BAYCV_BUILDING_LIBRARY)
#define BAYCV_API __attribute__((visibility("default")))
#else
#define BAYCV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bcv_status {
  BCV_OK = 0,
  BCV_ERR_INVALID_ARGUMENT = 1,
  BCV_ERR_SHAPE_MISMATCH = 2,
  BCV_ERR_TOKEN_MISMATCH = 3,
  BCV_ERR_NO_OOV_TOKENS = 4,
  BCV_ERR_TOO_FEW_ITEMS = 5,
  BCV_ERR_INDEX_OUT_OF_RANGE = 6,
  BCV_ERR_COMMAND_FAILED = 7,
  BCV_ERR_OUTPUT_UNREADABLE = 8,
  BCV_ERR_NO_SHARED_KEYS = 9,
  BCV_ERR_SCORE_MISMATCH = 10,
  BCV_ERR_TOO_FEW_DATASETS = 11,
  BCV_ERR_DIMENSION_MISMATCH = 12,
  BCV_ERR_MISSING_PAIR = 13,
  BCV_ERR_PARSE = 14,
  BCV_ERR_IO = 15,
  /* bcv_fit: chains were produced but some R-hat exceeds 1.05. */
  BCV_ERR_NOT_CONVERGED = 16,
  BCV_ERR_INTERNAL = 99
} bcv_status;

typedef enum bcv_verdict {
  BCV_VERDICT_LEFT = 0, /* difference below -rope: system B better */
  BCV_VERDICT_ROPE = 1, /* practically equivalent */
  BCV_VERDICT_RIGHT = 2 /* difference above +rope: system A better */
} bcv_verdict;

typedef enum bcv_rho_mode {
  BCV_RHO_INVERSE_K = 0, /* rho = 1/k */
  BCV_RHO_FIXED = 1
} bcv_rho_mode;

typedef struct bcv_corpus bcv_corpus;
typedef struct bcv_vocab bcv_vocab;
typedef struct bcv_plan bcv_plan;
typedef struct bcv_scores bcv_scores;
typedef struct bcv_diffs bcv_diffs;
typedef struct bcv_posterior bcv_posterior;
typedef struct bcv_ranking bcv_ranking;

BAYCV_API const char* bcv_version(void);
BAYCV_API const char* bcv_status_name(bcv_status status);
BAYCV_API const char* bcv_last_error(void);

/* ---- tagged corpora and metrics ---------------------------------------- */

/* token<TAB>tag per line, blank line between sentences. */
BAYCV_API bcv_status bcv_corpus_load(const char* path, bcv_corpus** out);
BAYCV_API void bcv_corpus_free(bcv_corpus* corpus);
BAYCV_API size_t bcv_corpus_sentence_count(const bcv_corpus* corpus);

BAYCV_API bcv_status bcv_vocab_load(const char* path, bcv_vocab** out);
BAYCV_API bcv_status bcv_vocab_from_corpus(const bcv_corpus* corpus,
                                           bcv_vocab** out);
BAYCV_API void bcv_vocab_free(bcv_vocab* vocab);

BAYCV_API bcv_status bcv_token_accuracy(const bcv_corpus* gold,
                                        const bcv_corpus* pred, double* out);
BAYCV_API bcv_status bcv_sentence_accuracy(const bcv_corpus* gold,
                                           const bcv_corpus* pred,
                                           double* out);
BAYCV_API bcv_status bcv_oov_accuracy(const bcv_vocab* train_vocab,
                                      const bcv_corpus* gold,
                                      const bcv_corpus* pred, double* out);

/* ---- split plans ------------------------------------------------------- */

BAYCV_API bcv_status bcv_plan_create(size_t n_items, size_t k, size_t m,
                                     uint64_t seed, bcv_plan** out);
BAYCV_API bcv_status bcv_plan_load(const char* path, bcv_plan** out);
/* manifest_ref may be NULL; otherwise it is recorded in the file header. */
BAYCV_API bcv_status bcv_plan_save(const bcv_plan* plan, const char* path,
                                   const char* manifest_ref);
BAYCV_API void bcv_plan_free(bcv_plan* plan);
BAYCV_API void bcv_plan_shape(const bcv_plan* plan, size_t* n_items,
                              size_t* k, size_t* m);
/* roles must hold n_items bytes: 0 train, 1 validation, 2 evaluation. */
BAYCV_API bcv_status bcv_plan_fold_roles(const bcv_plan* plan,
                                         size_t repetition, size_t eval_fold,
                                         unsigned char* roles);

/* ---- score matrices ---------------------------------------------------- */

BAYCV_API bcv_status bcv_scores_create(bcv_scores** out);
BAYCV_API bcv_status bcv_scores_load(const char* path, bcv_scores** out);
BAYCV_API bcv_status bcv_scores_save(const bcv_scores* scores,
                                     const char* path,
                                     const char* manifest_ref);
BAYCV_API void bcv_scores_free(bcv_scores* scores);
/* missing != 0 records NA and ignores score. */
BAYCV_API bcv_status bcv_scores_add(bcv_scores* scores, const char* dataset,
                                    const char* system, const char* metric,
                                    size_t repetition, size_t fold,
                                    double score, int missing);
BAYCV_API bcv_status bcv_scores_merge(bcv_scores* into,
                                      const bcv_scores* from);
BAYCV_API size_t bcv_scores_size(const bcv_scores* scores);
BAYCV_API size_t bcv_scores_count(const bcv_scores* scores,
                                  const char* system, const char* metric,
                                  int include_missing);
BAYCV_API size_t bcv_scores_system_count(const bcv_scores* scores);
BAYCV_API const char* bcv_scores_system_name(const bcv_scores* scores,
                                             size_t index);

typedef struct bcv_external_options {
  const char* dataset;
  const char* system;
  /* Shell command with {train}, {validation}, {eval}, {output}. */
  const char* command;
  size_t workers;
  const char* work_dir; /* NULL or "" for a fresh temporary directory */
  int vocab_includes_validation;
  int keep_files;
} bcv_external_options;

/* Runs the command for every (repetition, fold) of the plan and adds token,
 * sentence and oov scores to `into`. */
BAYCV_API bcv_status bcv_run_external(const bcv_plan* plan,
                                      const bcv_corpus* gold,
                                      const bcv_external_options* options,
                                      bcv_scores* into);

/* ---- difference series ------------------------------------------------- */

BAYCV_API bcv_status bcv_diffs_assemble(const bcv_scores* scores,
                                        const char* system_a,
                                        const char* system_b,
                                        const char* metric,
                                        bcv_rho_mode rho_mode, double rho,
                                        bcv_diffs** out);
BAYCV_API void bcv_diffs_free(bcv_diffs* diffs);
BAYCV_API size_t bcv_diffs_count(const bcv_diffs* diffs);
BAYCV_API const char* bcv_diffs_dataset(const bcv_diffs* diffs, size_t index);
BAYCV_API bcv_status bcv_diffs_values(const bcv_diffs* diffs, size_t index,
                                      const double** x, size_t* n,
                                      double* rho);
/* Half the width of the pooled empirical 95% interval of all differences. */
BAYCV_API bcv_status bcv_diffs_rope_ci95(const bcv_diffs* diffs, double* out);

typedef struct bcv_generate_params {
  double delta0;
  double sigma0;
  double nu;
  size_t q;
  size_t m;
  size_t k;
  double rho;
  double sigma_min;
  double sigma_max;
  uint64_t seed;
} bcv_generate_params;

BAYCV_API bcv_status bcv_generate(const bcv_generate_params* params,
                                  bcv_diffs** out);
/* Writes system_a = base + x and system_b = base for every difference;
 * system_b may be NULL to write system_a only. */
BAYCV_API bcv_status bcv_diffs_to_scores(const bcv_diffs* diffs,
                                         const char* system_a,
                                         const char* system_b,
                                         const char* metric, double base,
                                         bcv_scores* into);

/* ---- hierarchical model ------------------------------------------------ */

typedef struct bcv_model_config {
  double sigma_bar_factor;
  double delta0_prior_halfwidth;
  double nu_shape;
  double nu_rate;
  double nu_min;
  int standardize;
  size_t chains;
  size_t samples_per_chain;
  size_t warmup;
  uint64_t seed;
  size_t workers;
} bcv_model_config;

BAYCV_API void bcv_model_config_init(bcv_model_config* config);

/* On BCV_OK or BCV_ERR_NOT_CONVERGED *out holds the posterior. */
BAYCV_API bcv_status bcv_fit(const bcv_diffs* diffs,
                             const bcv_model_config* config,
                             bcv_posterior** out);
BAYCV_API void bcv_posterior_free(bcv_posterior* posterior);
BAYCV_API bcv_status bcv_posterior_save(const bcv_posterior* posterior,
                                        const char* chains_csv,
                                        const char* metadata_path,
                                        const char* manifest_ref);
BAYCV_API bcv_status bcv_posterior_load(const char* chains_csv,
                                        const char* metadata_path,
                                        bcv_posterior** out);
BAYCV_API int bcv_posterior_converged(const bcv_posterior* posterior);
BAYCV_API double bcv_posterior_standardization(const bcv_posterior* posterior);
BAYCV_API size_t bcv_posterior_draw_count(const bcv_posterior* posterior);
BAYCV_API size_t bcv_posterior_diagnostic_count(const bcv_posterior* posterior);
BAYCV_API bcv_status bcv_posterior_diagnostic(const bcv_posterior* posterior,
                                              size_t index, const char** name,
                                              double* r_hat, double* ess);
/* Draws of a parameter on the raw difference scale, chain-major. */
BAYCV_API bcv_status bcv_posterior_draws(const bcv_posterior* posterior,
                                         const char* parameter, double* out,
                                         size_t capacity, size_t* written);
BAYCV_API bcv_status bcv_posterior_set_meta(bcv_posterior* posterior,
                                            const char* key,
                                            const char* value);
/* Empty string when the key is absent. */
BAYCV_API const char* bcv_posterior_meta(const bcv_posterior* posterior,
                                         const char* key);

/* ---- decisions --------------------------------------------------------- */

typedef struct bcv_triple {
  size_t n_left;
  size_t n_rope;
  size_t n_right;
  size_t n_samples;
  double p_left;
  double p_rope;
  double p_right;
  bcv_verdict verdict;
} bcv_triple;

/* rope_halfwidth is on the raw difference scale. */
BAYCV_API bcv_status bcv_tally(const bcv_posterior* posterior,
                               double rope_halfwidth, bcv_triple* out);
BAYCV_API bcv_status bcv_region_probs(double delta0, double sigma0, double nu,
                                      double rope_halfwidth, double* p_left,
                                      double* p_rope, double* p_right);
BAYCV_API void bcv_simplex_coordinates(double p_left, double p_rope,
                                       double p_right, double* x, double* y);
BAYCV_API const char* bcv_verdict_name(bcv_verdict verdict);

typedef struct bcv_ttest_result {
  double location;
  double scale;
  double dof;
  int degenerate_variance;
  double p_left;
  double p_rope;
  double p_right;
  bcv_verdict verdict;
} bcv_ttest_result;

/* Correlated Bayesian t-test on dataset `index` of diffs. */
BAYCV_API bcv_status bcv_correlated_ttest(const bcv_diffs* diffs, size_t index,
                                          double rope_halfwidth,
                                          bcv_ttest_result* out);

/* Column header of the pairwise report CSV (no trailing newline). */
BAYCV_API const char* bcv_report_header(void);
/* Formats one report row into buf (no trailing newline). *needed receives
 * the length without the terminator; fails with INVALID_ARGUMENT when
 * capacity is too small. */
BAYCV_API bcv_status bcv_report_row(const char* system_a, const char* system_b,
                                    const char* metric,
                                    const bcv_triple* triple,
                                    double rope_halfwidth, char* buf,
                                    size_t capacity, size_t* needed);

typedef struct bcv_pair_verdict {
  const char* system_a;
  const char* system_b;
  bcv_verdict verdict;
} bcv_pair_verdict;

BAYCV_API bcv_status bcv_rank(const char* const* systems, size_t n_systems,
                              const bcv_pair_verdict* pairs, size_t n_pairs,
                              bcv_ranking** out);
BAYCV_API void bcv_ranking_free(bcv_ranking* ranking);
BAYCV_API int bcv_ranking_consistent(const bcv_ranking* ranking);
/* Empty when inconsistent. */
BAYCV_API const char* bcv_ranking_chain(const bcv_ranking* ranking);
BAYCV_API size_t bcv_ranking_edge_count(const bcv_ranking* ranking);
BAYCV_API const char* bcv_ranking_edge(const bcv_ranking* ranking,
                                       size_t index);
BAYCV_API size_t bcv_ranking_issue_count(const bcv_ranking* ranking);
BAYCV_API const char* bcv_ranking_issue(const bcv_ranking* ranking,
                                        size_t index);

/* ---- plots ------------------------------------------------------------- */

/* Simplex scatter of every posterior draw; left vertex labelled with
 * label_left (system B), right with label_right (system A). */
BAYCV_API bcv_status bcv_plot_svg(const bcv_posterior* posterior,
                                  double rope_halfwidth,
                                  const char* label_left,
                                  const char* label_right, const char* title,
                                  const char* path, const char* manifest_ref);

#ifdef __cplusplus
}
#endif

#endif /* BAYCV_H */
