#include "baycv.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "baycv/decision.hpp"
#include "baycv/error.hpp"
#include "baycv/harness.hpp"
#include "baycv/metrics.hpp"
#include "baycv/model.hpp"
#include "baycv/plot.hpp"

struct bcv_corpus {
  baycv::TaggedCorpus corpus;
};
struct bcv_vocab {
  baycv::Vocabulary vocab;
};
struct bcv_plan {
  baycv::SplitPlan plan;
};
struct bcv_scores {
  baycv::ScoreMatrix scores;
};
struct bcv_diffs {
  std::vector<baycv::DifferenceSeries> series;
};
struct bcv_posterior {
  baycv::PosteriorChains chains;
  mutable std::string meta_scratch;
};
struct bcv_ranking {
  baycv::Ranking ranking;
};

namespace {

using baycv::ErrorCode;

thread_local std::string g_last_error;

bcv_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return BCV_ERR_INVALID_ARGUMENT;
    case ErrorCode::ShapeMismatch: return BCV_ERR_SHAPE_MISMATCH;
    case ErrorCode::TokenMismatch: return BCV_ERR_TOKEN_MISMATCH;
    case ErrorCode::NoOovTokens: return BCV_ERR_NO_OOV_TOKENS;
    case ErrorCode::TooFewItems: return BCV_ERR_TOO_FEW_ITEMS;
    case ErrorCode::IndexOutOfRange: return BCV_ERR_INDEX_OUT_OF_RANGE;
    case ErrorCode::CommandFailed: return BCV_ERR_COMMAND_FAILED;
    case ErrorCode::OutputUnreadable: return BCV_ERR_OUTPUT_UNREADABLE;
    case ErrorCode::NoSharedKeys: return BCV_ERR_NO_SHARED_KEYS;
    case ErrorCode::ScoreMismatch: return BCV_ERR_SCORE_MISMATCH;
    case ErrorCode::TooFewDatasets: return BCV_ERR_TOO_FEW_DATASETS;
    case ErrorCode::DimensionMismatch: return BCV_ERR_DIMENSION_MISMATCH;
    case ErrorCode::MissingPair: return BCV_ERR_MISSING_PAIR;
    case ErrorCode::Parse: return BCV_ERR_PARSE;
    case ErrorCode::Io: return BCV_ERR_IO;
  }
  return BCV_ERR_INTERNAL;
}

template <typename F>
bcv_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const baycv::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BCV_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BCV_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BCV_ERR_INTERNAL;
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) {
    baycv::raise(ErrorCode::InvalidArgument,
                 std::string(what) + " must not be NULL");
  }
}

std::string opt_string(const char* s) { return s ? std::string(s) : std::string(); }

baycv::RhoPolicy rho_policy(bcv_rho_mode mode, double rho) {
  if (mode == BCV_RHO_FIXED) return baycv::RhoPolicy::fixed(rho);
  if (mode == BCV_RHO_INVERSE_K) return baycv::RhoPolicy::inverse_k();
  baycv::raise(ErrorCode::InvalidArgument, "unknown rho mode");
}

void fill_triple(const baycv::DecisionTriple& t, bcv_triple* out) {
  out->n_left = t.n_left;
  out->n_rope = t.n_rope;
  out->n_right = t.n_right;
  out->n_samples = t.n_samples;
  out->p_left = t.p_left;
  out->p_rope = t.p_rope;
  out->p_right = t.p_right;
  out->verdict = static_cast<bcv_verdict>(t.verdict);
}

baycv::DecisionTriple to_triple(const bcv_triple* t) {
  auto triple = baycv::make_triple(t->n_left, t->n_rope, t->n_right);
  if (t->n_samples != triple.n_samples) {
    baycv::raise(ErrorCode::InvalidArgument,
                 "triple counters do not sum to n_samples");
  }
  return triple;
}

baycv::Verdict to_verdict(bcv_verdict v) {
  switch (v) {
    case BCV_VERDICT_LEFT: return baycv::Verdict::Left;
    case BCV_VERDICT_ROPE: return baycv::Verdict::Rope;
    case BCV_VERDICT_RIGHT: return baycv::Verdict::Right;
  }
  baycv::raise(ErrorCode::InvalidArgument, "unknown verdict");
}

const baycv::DifferenceSeries& series_at(const bcv_diffs* diffs,
                                         std::size_t index) {
  require(diffs, "diffs");
  if (index >= diffs->series.size()) {
    baycv::raise(ErrorCode::IndexOutOfRange, "dataset index out of range");
  }
  return diffs->series[index];
}

}  // namespace

extern "C" {

const char* bcv_version(void) { return BAYCV_VERSION; }

const char* bcv_status_name(bcv_status status) {
  switch (status) {
    case BCV_OK: return "OK";
    case BCV_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case BCV_ERR_SHAPE_MISMATCH: return "ShapeMismatch";
    case BCV_ERR_TOKEN_MISMATCH: return "TokenMismatch";
    case BCV_ERR_NO_OOV_TOKENS: return "NoOovTokens";
    case BCV_ERR_TOO_FEW_ITEMS: return "TooFewItems";
    case BCV_ERR_INDEX_OUT_OF_RANGE: return "IndexOutOfRange";
    case BCV_ERR_COMMAND_FAILED: return "CommandFailed";
    case BCV_ERR_OUTPUT_UNREADABLE: return "OutputUnreadable";
    case BCV_ERR_NO_SHARED_KEYS: return "NoSharedKeys";
    case BCV_ERR_SCORE_MISMATCH: return "ScoreMismatch";
    case BCV_ERR_TOO_FEW_DATASETS: return "TooFewDatasets";
    case BCV_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case BCV_ERR_MISSING_PAIR: return "MissingPair";
    case BCV_ERR_PARSE: return "Parse";
    case BCV_ERR_IO: return "Io";
    case BCV_ERR_NOT_CONVERGED: return "NotConverged";
    case BCV_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* bcv_last_error(void) { return g_last_error.c_str(); }

bcv_status bcv_corpus_load(const char* path, bcv_corpus** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new bcv_corpus{baycv::load_corpus(path)};
    return BCV_OK;
  });
}

void bcv_corpus_free(bcv_corpus* corpus) { delete corpus; }

size_t bcv_corpus_sentence_count(const bcv_corpus* corpus) {
  return corpus ? corpus->corpus.size() : 0;
}

bcv_status bcv_vocab_load(const char* path, bcv_vocab** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new bcv_vocab{baycv::load_vocabulary(path)};
    return BCV_OK;
  });
}

bcv_status bcv_vocab_from_corpus(const bcv_corpus* corpus, bcv_vocab** out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(out, "out");
    *out = new bcv_vocab{baycv::Vocabulary::from_corpus(corpus->corpus)};
    return BCV_OK;
  });
}

void bcv_vocab_free(bcv_vocab* vocab) { delete vocab; }

bcv_status bcv_token_accuracy(const bcv_corpus* gold, const bcv_corpus* pred,
                              double* out) {
  return guarded([&] {
    require(gold, "gold");
    require(pred, "pred");
    require(out, "out");
    *out = baycv::token_accuracy(gold->corpus, pred->corpus);
    return BCV_OK;
  });
}

bcv_status bcv_sentence_accuracy(const bcv_corpus* gold,
                                 const bcv_corpus* pred, double* out) {
  return guarded([&] {
    require(gold, "gold");
    require(pred, "pred");
    require(out, "out");
    *out = baycv::sentence_accuracy(gold->corpus, pred->corpus);
    return BCV_OK;
  });
}

bcv_status bcv_oov_accuracy(const bcv_vocab* train_vocab,
                            const bcv_corpus* gold, const bcv_corpus* pred,
                            double* out) {
  return guarded([&] {
    require(train_vocab, "train_vocab");
    require(gold, "gold");
    require(pred, "pred");
    require(out, "out");
    *out = baycv::oov_accuracy(train_vocab->vocab, gold->corpus, pred->corpus);
    return BCV_OK;
  });
}

bcv_status bcv_plan_create(size_t n_items, size_t k, size_t m, uint64_t seed,
                           bcv_plan** out) {
  return guarded([&] {
    require(out, "out");
    *out = new bcv_plan{baycv::make_splits(n_items, k, m, seed)};
    return BCV_OK;
  });
}

bcv_status bcv_plan_load(const char* path, bcv_plan** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new bcv_plan{baycv::load_plan(path)};
    return BCV_OK;
  });
}

bcv_status bcv_plan_save(const bcv_plan* plan, const char* path,
                         const char* manifest_ref) {
  return guarded([&] {
    require(plan, "plan");
    require(path, "path");
    std::ofstream out(path);
    if (!out) baycv::raise(ErrorCode::Io, std::string("cannot write ") + path);
    baycv::write_plan(out, plan->plan, opt_string(manifest_ref));
    out.close();
    if (!out) baycv::raise(ErrorCode::Io, std::string("failed writing ") + path);
    return BCV_OK;
  });
}

void bcv_plan_free(bcv_plan* plan) { delete plan; }

void bcv_plan_shape(const bcv_plan* plan, size_t* n_items, size_t* k,
                    size_t* m) {
  if (!plan) return;
  if (n_items) *n_items = plan->plan.n_items;
  if (k) *k = plan->plan.k;
  if (m) *m = plan->plan.m;
}

bcv_status bcv_plan_fold_roles(const bcv_plan* plan, size_t repetition,
                               size_t eval_fold, unsigned char* roles) {
  return guarded([&] {
    require(plan, "plan");
    require(roles, "roles");
    const auto r = baycv::fold_roles(plan->plan, repetition, eval_fold);
    for (auto i : r.train) roles[i] = 0;
    for (auto i : r.validation) roles[i] = 1;
    for (auto i : r.eval) roles[i] = 2;
    return BCV_OK;
  });
}

bcv_status bcv_scores_create(bcv_scores** out) {
  return guarded([&] {
    require(out, "out");
    *out = new bcv_scores{};
    return BCV_OK;
  });
}

bcv_status bcv_scores_load(const char* path, bcv_scores** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new bcv_scores{baycv::load_scores(path)};
    return BCV_OK;
  });
}

bcv_status bcv_scores_save(const bcv_scores* scores, const char* path,
                           const char* manifest_ref) {
  return guarded([&] {
    require(scores, "scores");
    require(path, "path");
    std::ofstream out(path);
    if (!out) baycv::raise(ErrorCode::Io, std::string("cannot write ") + path);
    baycv::write_scores(out, scores->scores, opt_string(manifest_ref));
    out.close();
    if (!out) baycv::raise(ErrorCode::Io, std::string("failed writing ") + path);
    return BCV_OK;
  });
}

void bcv_scores_free(bcv_scores* scores) { delete scores; }

bcv_status bcv_scores_add(bcv_scores* scores, const char* dataset,
                          const char* system, const char* metric,
                          size_t repetition, size_t fold, double score,
                          int missing) {
  return guarded([&] {
    require(scores, "scores");
    require(dataset, "dataset");
    require(system, "system");
    require(metric, "metric");
    baycv::ScoreMatrix::Score value;
    if (!missing) value = score;
    scores->scores.add({dataset, system, metric, repetition, fold}, value);
    return BCV_OK;
  });
}

bcv_status bcv_scores_merge(bcv_scores* into, const bcv_scores* from) {
  return guarded([&] {
    require(into, "into");
    require(from, "from");
    baycv::ScoreMatrix merged = into->scores;
    merged.merge(from->scores);
    into->scores = std::move(merged);
    return BCV_OK;
  });
}

size_t bcv_scores_size(const bcv_scores* scores) {
  return scores ? scores->scores.size() : 0;
}

size_t bcv_scores_count(const bcv_scores* scores, const char* system,
                        const char* metric, int include_missing) {
  if (!scores || !system || !metric) return 0;
  return scores->scores.count(system, metric, include_missing != 0);
}

size_t bcv_scores_system_count(const bcv_scores* scores) {
  return scores ? scores->scores.systems().size() : 0;
}

const char* bcv_scores_system_name(const bcv_scores* scores, size_t index) {
  if (!scores || index >= scores->scores.systems().size()) return nullptr;
  return scores->scores.systems()[index].c_str();
}

bcv_status bcv_run_external(const bcv_plan* plan, const bcv_corpus* gold,
                            const bcv_external_options* options,
                            bcv_scores* into) {
  return guarded([&] {
    require(plan, "plan");
    require(gold, "gold");
    require(options, "options");
    require(into, "into");
    baycv::ExternalRunOptions opts;
    opts.dataset_id = opt_string(options->dataset);
    opts.system_id = opt_string(options->system);
    opts.command = opt_string(options->command);
    opts.workers = options->workers;
    opts.work_dir = opt_string(options->work_dir);
    opts.vocab_includes_validation = options->vocab_includes_validation != 0;
    opts.keep_files = options->keep_files != 0;
    auto produced = baycv::run_external(plan->plan, gold->corpus, opts);
    baycv::ScoreMatrix merged = into->scores;
    merged.merge(produced);
    into->scores = std::move(merged);
    return BCV_OK;
  });
}

bcv_status bcv_diffs_assemble(const bcv_scores* scores, const char* system_a,
                              const char* system_b, const char* metric,
                              bcv_rho_mode rho_mode, double rho,
                              bcv_diffs** out) {
  return guarded([&] {
    require(scores, "scores");
    require(system_a, "system_a");
    require(system_b, "system_b");
    require(metric, "metric");
    require(out, "out");
    *out = new bcv_diffs{baycv::assemble_differences(
        scores->scores, system_a, system_b, metric, rho_policy(rho_mode, rho))};
    return BCV_OK;
  });
}

void bcv_diffs_free(bcv_diffs* diffs) { delete diffs; }

size_t bcv_diffs_count(const bcv_diffs* diffs) {
  return diffs ? diffs->series.size() : 0;
}

const char* bcv_diffs_dataset(const bcv_diffs* diffs, size_t index) {
  if (!diffs || index >= diffs->series.size()) return nullptr;
  return diffs->series[index].dataset_id.c_str();
}

bcv_status bcv_diffs_values(const bcv_diffs* diffs, size_t index,
                            const double** x, size_t* n, double* rho) {
  return guarded([&] {
    const auto& s = series_at(diffs, index);
    if (x) *x = s.x.data();
    if (n) *n = s.x.size();
    if (rho) *rho = s.rho;
    return BCV_OK;
  });
}

bcv_status bcv_diffs_rope_ci95(const bcv_diffs* diffs, double* out) {
  return guarded([&] {
    require(diffs, "diffs");
    require(out, "out");
    *out = baycv::rope_from_ci95(diffs->series);
    return BCV_OK;
  });
}

bcv_status bcv_generate(const bcv_generate_params* params, bcv_diffs** out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    baycv::GenerateParams p;
    p.delta0 = params->delta0;
    p.sigma0 = params->sigma0;
    p.nu = params->nu;
    p.q = params->q;
    p.m = params->m;
    p.k = params->k;
    p.rho = params->rho;
    p.sigma_min = params->sigma_min;
    p.sigma_max = params->sigma_max;
    p.seed = params->seed;
    *out = new bcv_diffs{baycv::generate(p)};
    return BCV_OK;
  });
}

bcv_status bcv_diffs_to_scores(const bcv_diffs* diffs, const char* system_a,
                               const char* system_b, const char* metric,
                               double base, bcv_scores* into) {
  return guarded([&] {
    require(diffs, "diffs");
    require(system_a, "system_a");
    require(metric, "metric");
    require(into, "into");
    baycv::ScoreMatrix merged = into->scores;
    for (const auto& s : diffs->series) {
      const std::size_t k = s.k == 0 ? s.x.size() : s.k;
      for (std::size_t j = 0; j < s.x.size(); ++j) {
        const std::size_t rep = j / k;
        const std::size_t fold = j % k;
        merged.add({s.dataset_id, system_a, metric, rep, fold}, base + s.x[j]);
        if (system_b) merged.add({s.dataset_id, system_b, metric, rep, fold}, base);
      }
    }
    into->scores = std::move(merged);
    return BCV_OK;
  });
}

void bcv_model_config_init(bcv_model_config* config) {
  if (!config) return;
  const baycv::ModelConfig d;
  config->sigma_bar_factor = d.sigma_bar_factor;
  config->delta0_prior_halfwidth = d.delta0_prior_halfwidth;
  config->nu_shape = d.nu_shape;
  config->nu_rate = d.nu_rate;
  config->nu_min = d.nu_min;
  config->standardize = d.standardize ? 1 : 0;
  config->chains = d.chains;
  config->samples_per_chain = d.samples_per_chain;
  config->warmup = d.warmup;
  config->seed = d.seed;
  config->workers = d.workers;
}

bcv_status bcv_fit(const bcv_diffs* diffs, const bcv_model_config* config,
                   bcv_posterior** out) {
  return guarded([&] {
    require(diffs, "diffs");
    require(out, "out");
    baycv::ModelConfig c;
    if (config) {
      c.sigma_bar_factor = config->sigma_bar_factor;
      c.delta0_prior_halfwidth = config->delta0_prior_halfwidth;
      c.nu_shape = config->nu_shape;
      c.nu_rate = config->nu_rate;
      c.nu_min = config->nu_min;
      c.standardize = config->standardize != 0;
      c.chains = config->chains;
      c.samples_per_chain = config->samples_per_chain;
      c.warmup = config->warmup;
      c.seed = config->seed;
      c.workers = config->workers;
    }
    auto post = std::make_unique<bcv_posterior>();
    post->chains = baycv::fit(diffs->series, c);
    const bool converged = post->chains.converged;
    *out = post.release();
    if (!converged) {
      g_last_error = "posterior did not converge (R-hat above 1.05)";
      return BCV_ERR_NOT_CONVERGED;
    }
    return BCV_OK;
  });
}

void bcv_posterior_free(bcv_posterior* posterior) { delete posterior; }

bcv_status bcv_posterior_save(const bcv_posterior* posterior,
                              const char* chains_csv,
                              const char* metadata_path,
                              const char* manifest_ref) {
  return guarded([&] {
    require(posterior, "posterior");
    require(chains_csv, "chains_csv");
    require(metadata_path, "metadata_path");
    baycv::save_chains(posterior->chains, chains_csv, metadata_path,
                       opt_string(manifest_ref));
    return BCV_OK;
  });
}

bcv_status bcv_posterior_load(const char* chains_csv,
                              const char* metadata_path,
                              bcv_posterior** out) {
  return guarded([&] {
    require(chains_csv, "chains_csv");
    require(metadata_path, "metadata_path");
    require(out, "out");
    auto post = std::make_unique<bcv_posterior>();
    post->chains = baycv::load_chains(chains_csv, metadata_path);
    *out = post.release();
    return BCV_OK;
  });
}

int bcv_posterior_converged(const bcv_posterior* posterior) {
  return posterior && posterior->chains.converged ? 1 : 0;
}

double bcv_posterior_standardization(const bcv_posterior* posterior) {
  return posterior ? posterior->chains.standardization_constant : 0.0;
}

size_t bcv_posterior_draw_count(const bcv_posterior* posterior) {
  return posterior ? posterior->chains.n_draws() : 0;
}

size_t bcv_posterior_diagnostic_count(const bcv_posterior* posterior) {
  return posterior ? posterior->chains.diagnostics.size() : 0;
}

bcv_status bcv_posterior_diagnostic(const bcv_posterior* posterior,
                                    size_t index, const char** name,
                                    double* r_hat, double* ess) {
  return guarded([&] {
    require(posterior, "posterior");
    const auto& diags = posterior->chains.diagnostics;
    if (index >= diags.size()) {
      baycv::raise(ErrorCode::IndexOutOfRange, "diagnostic index out of range");
    }
    if (name) *name = diags[index].parameter.c_str();
    if (r_hat) *r_hat = diags[index].r_hat;
    if (ess) *ess = diags[index].ess;
    return BCV_OK;
  });
}

bcv_status bcv_posterior_draws(const bcv_posterior* posterior,
                               const char* parameter, double* out,
                               size_t capacity, size_t* written) {
  return guarded([&] {
    require(posterior, "posterior");
    require(parameter, "parameter");
    const auto& chains = posterior->chains;
    const auto draws = chains.trace(parameter).flatten();
    if (written) *written = draws.size();
    if (out == nullptr) return BCV_OK;
    if (capacity < draws.size()) {
      baycv::raise(ErrorCode::InvalidArgument, "output buffer too small");
    }
    const double c = std::string(parameter) == "nu"
                         ? 1.0
                         : chains.standardization_constant;
    for (std::size_t i = 0; i < draws.size(); ++i) out[i] = draws[i] * c;
    return BCV_OK;
  });
}

bcv_status bcv_posterior_set_meta(bcv_posterior* posterior, const char* key,
                                  const char* value) {
  return guarded([&] {
    require(posterior, "posterior");
    require(key, "key");
    require(value, "value");
    posterior->chains.set_meta(key, value);
    return BCV_OK;
  });
}

const char* bcv_posterior_meta(const bcv_posterior* posterior,
                               const char* key) {
  if (!posterior || !key) return "";
  posterior->meta_scratch = posterior->chains.meta(key);
  return posterior->meta_scratch.c_str();
}

bcv_status bcv_tally(const bcv_posterior* posterior, double rope_halfwidth,
                     bcv_triple* out) {
  return guarded([&] {
    require(posterior, "posterior");
    require(out, "out");
    fill_triple(baycv::tally(posterior->chains,
                             baycv::RopeInterval(rope_halfwidth)),
                out);
    return BCV_OK;
  });
}

bcv_status bcv_region_probs(double delta0, double sigma0, double nu,
                            double rope_halfwidth, double* p_left,
                            double* p_rope, double* p_right) {
  return guarded([&] {
    const auto p = baycv::region_probs(delta0, sigma0, nu,
                                       baycv::RopeInterval(rope_halfwidth));
    if (p_left) *p_left = p.left;
    if (p_rope) *p_rope = p.rope;
    if (p_right) *p_right = p.right;
    return BCV_OK;
  });
}

void bcv_simplex_coordinates(double p_left, double p_rope, double p_right,
                             double* x, double* y) {
  const auto p = baycv::simplex_coordinates(p_left, p_rope, p_right);
  if (x) *x = p.x;
  if (y) *y = p.y;
}

const char* bcv_verdict_name(bcv_verdict verdict) {
  switch (verdict) {
    case BCV_VERDICT_LEFT: return "left";
    case BCV_VERDICT_ROPE: return "rope";
    case BCV_VERDICT_RIGHT: return "right";
  }
  return "unknown";
}

bcv_status bcv_correlated_ttest(const bcv_diffs* diffs, size_t index,
                                double rope_halfwidth, bcv_ttest_result* out) {
  return guarded([&] {
    require(out, "out");
    const auto post = baycv::correlated_ttest(series_at(diffs, index));
    const auto p = baycv::decide(post, baycv::RopeInterval(rope_halfwidth));
    out->location = post.location;
    out->scale = post.scale;
    out->dof = post.dof;
    out->degenerate_variance = post.degenerate_variance ? 1 : 0;
    out->p_left = p.left;
    out->p_rope = p.rope;
    out->p_right = p.right;
    out->verdict = static_cast<bcv_verdict>(p.argmax());
    return BCV_OK;
  });
}

const char* bcv_report_header(void) { return baycv::kReportHeader; }

bcv_status bcv_report_row(const char* system_a, const char* system_b,
                          const char* metric, const bcv_triple* triple,
                          double rope_halfwidth, char* buf, size_t capacity,
                          size_t* needed) {
  return guarded([&] {
    require(system_a, "system_a");
    require(system_b, "system_b");
    require(metric, "metric");
    require(triple, "triple");
    const std::string row = baycv::format_report_row(
        {system_a, system_b, metric, to_triple(triple), rope_halfwidth});
    if (needed) *needed = row.size();
    if (buf == nullptr || capacity <= row.size()) {
      baycv::raise(ErrorCode::InvalidArgument, "report buffer too small");
    }
    std::memcpy(buf, row.c_str(), row.size() + 1);
    return BCV_OK;
  });
}

bcv_status bcv_rank(const char* const* systems, size_t n_systems,
                    const bcv_pair_verdict* pairs, size_t n_pairs,
                    bcv_ranking** out) {
  return guarded([&] {
    require(out, "out");
    if (n_systems > 0) require(systems, "systems");
    if (n_pairs > 0) require(pairs, "pairs");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n_systems; ++i) {
      require(systems[i], "system name");
      names.emplace_back(systems[i]);
    }
    std::vector<baycv::PairVerdict> verdicts;
    for (std::size_t i = 0; i < n_pairs; ++i) {
      require(pairs[i].system_a, "pair system_a");
      require(pairs[i].system_b, "pair system_b");
      verdicts.push_back({pairs[i].system_a, pairs[i].system_b,
                          to_verdict(pairs[i].verdict)});
    }
    *out = new bcv_ranking{baycv::rank(names, verdicts)};
    return BCV_OK;
  });
}

void bcv_ranking_free(bcv_ranking* ranking) { delete ranking; }

int bcv_ranking_consistent(const bcv_ranking* ranking) {
  return ranking && ranking->ranking.consistent ? 1 : 0;
}

const char* bcv_ranking_chain(const bcv_ranking* ranking) {
  return ranking ? ranking->ranking.chain.c_str() : "";
}

size_t bcv_ranking_edge_count(const bcv_ranking* ranking) {
  return ranking ? ranking->ranking.edges.size() : 0;
}

const char* bcv_ranking_edge(const bcv_ranking* ranking, size_t index) {
  if (!ranking || index >= ranking->ranking.edges.size()) return nullptr;
  return ranking->ranking.edges[index].c_str();
}

size_t bcv_ranking_issue_count(const bcv_ranking* ranking) {
  return ranking ? ranking->ranking.inconsistencies.size() : 0;
}

const char* bcv_ranking_issue(const bcv_ranking* ranking, size_t index) {
  if (!ranking || index >= ranking->ranking.inconsistencies.size()) {
    return nullptr;
  }
  return ranking->ranking.inconsistencies[index].c_str();
}

bcv_status bcv_plot_svg(const bcv_posterior* posterior, double rope_halfwidth,
                        const char* label_left, const char* label_right,
                        const char* title, const char* path,
                        const char* manifest_ref) {
  return guarded([&] {
    require(posterior, "posterior");
    require(path, "path");
    const baycv::RopeInterval rope(rope_halfwidth);
    const auto points = baycv::posterior_simplex_points(posterior->chains, rope);
    const auto triple = baycv::tally(posterior->chains, rope);
    baycv::SimplexLabels labels;
    labels.left = opt_string(label_left);
    labels.right = opt_string(label_right);
    labels.title = opt_string(title);
    std::ofstream out(path);
    if (!out) baycv::raise(ErrorCode::Io, std::string("cannot write ") + path);
    baycv::write_simplex_svg(out, points, triple, labels,
                             opt_string(manifest_ref));
    out.close();
    if (!out) baycv::raise(ErrorCode::Io, std::string("failed writing ") + path);
    return BCV_OK;
  });
}

}  // extern "C"
