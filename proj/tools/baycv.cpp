#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "baycv.h"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kNotConverged = 3, kIo = 4 };

struct Failure : std::runtime_error {
  int code;
  Failure(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

int exit_code_of(bcv_status s) {
  switch (s) {
    case BCV_OK: return kOk;
    case BCV_ERR_NOT_CONVERGED: return kNotConverged;
    case BCV_ERR_IO:
    case BCV_ERR_COMMAND_FAILED:
    case BCV_ERR_OUTPUT_UNREADABLE: return kIo;
    case BCV_ERR_INTERNAL: return kInternal;
    default: return kUsage;
  }
}

void check(bcv_status s, const std::string& context) {
  if (s == BCV_OK) return;
  throw Failure(exit_code_of(s), context + ": " + bcv_status_name(s) + ": " +
                                     bcv_last_error());
}

struct Free {
  void operator()(bcv_corpus* p) const { bcv_corpus_free(p); }
  void operator()(bcv_plan* p) const { bcv_plan_free(p); }
  void operator()(bcv_scores* p) const { bcv_scores_free(p); }
  void operator()(bcv_diffs* p) const { bcv_diffs_free(p); }
  void operator()(bcv_posterior* p) const { bcv_posterior_free(p); }
  void operator()(bcv_ranking* p) const { bcv_ranking_free(p); }
};
template <typename T>
using Owned = std::unique_ptr<T, Free>;

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure(kIo, "cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                               EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Failure(kInternal, "sha256 unavailable");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char b[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

// Key-value record of one command invocation. Every output file carries the
// manifest's file name.
class Manifest {
 public:
  Manifest(std::string command, const std::string& primary_output)
      : path_(primary_output + ".manifest"), started_(now_utc()) {
    set("command", std::move(command));
    set("version", bcv_version());
  }

  void config(const CLI::App& sub) {
    std::istringstream lines(sub.config_to_str(true, false));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty() || line[0] == '#' || line[0] == '[') continue;
      entries_.push_back("config." + line);
    }
  }
  void set(const std::string& key, const std::string& value) {
    entries_.push_back(key + "=" + value);
  }
  void input(const std::string& path) {
    set("input." + path + ".sha256", sha256_file(path));
  }
  void output(const std::string& path) { outputs_.push_back(path); }
  std::string ref() const { return fs::path(path_).filename().string(); }

  void write() {
    std::ofstream out(path_);
    if (!out) throw Failure(kIo, "cannot write " + path_);
    for (const auto& e : entries_) out << e << '\n';
    for (const auto& o : outputs_) out << "output=" << o << '\n';
    out << "started=" << started_ << '\n';
    out << "finished=" << now_utc() << '\n';
    out.close();
    if (!out) throw Failure(kIo, "failed writing " + path_);
    std::cout << "manifest: " << path_ << '\n';
  }

 private:
  std::string path_;
  std::string started_;
  std::vector<std::string> entries_;
  std::vector<std::string> outputs_;
};

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::size_t default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

struct ModelFlags {
  std::uint64_t seed = 1;
  std::size_t chains = 4;
  std::size_t samples = 12500;
  std::size_t warmup = 2000;
  bool no_standardize = false;
  std::size_t workers = default_workers();
  std::optional<double> rho;
  std::optional<double> rope;
  bool rope_ci95 = false;

  void attach(CLI::App* sub) {
    sub->add_option("--seed", seed, "random seed")->capture_default_str();
    sub->add_option("--chains", chains, "MCMC chains")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1024}))
        ->capture_default_str();
    sub->add_option("--samples", samples, "retained draws per chain")
        ->check(CLI::Range(std::size_t{1000}, std::size_t{100000000}))
        ->capture_default_str();
    sub->add_option("--warmup", warmup, "adaptation draws per chain")
        ->capture_default_str();
    sub->add_flag("--no-standardize", no_standardize,
                  "fit on the raw difference scale");
    sub->add_option("--workers", workers, "threads for chains")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--rho", rho, "fold correlation (default 1/k)")
        ->check(CLI::Range(0.0, 0.999999));
    auto* r = sub->add_option("--rope", rope, "ROPE half-width on the score scale")
                  ->check(CLI::NonNegativeNumber);
    sub->add_flag("--rope-ci95", rope_ci95,
                  "ROPE half-width from the pooled 95% interval of differences")
        ->excludes(r);
  }

  bcv_model_config config() const {
    bcv_model_config c;
    bcv_model_config_init(&c);
    c.seed = seed;
    c.chains = chains;
    c.samples_per_chain = samples;
    c.warmup = warmup;
    c.standardize = no_standardize ? 0 : 1;
    c.workers = workers;
    return c;
  }

  Owned<bcv_diffs> diffs(const bcv_scores* scores, const std::string& a,
                         const std::string& b, const std::string& metric) const {
    bcv_diffs* d = nullptr;
    check(bcv_diffs_assemble(scores, a.c_str(), b.c_str(), metric.c_str(),
                             rho ? BCV_RHO_FIXED : BCV_RHO_INVERSE_K,
                             rho.value_or(0.0), &d),
          "assembling " + a + " - " + b);
    return Owned<bcv_diffs>(d);
  }

  double rope_for(const bcv_diffs* d) const {
    if (!rope_ci95) return rope.value_or(0.01);
    double r = 0.0;
    check(bcv_diffs_rope_ci95(d, &r), "ROPE from 95% interval");
    return r;
  }

  std::string rope_mode() const {
    return rope_ci95 ? "ci95 (half width of the pooled 2.5%-97.5% type-7 "
                       "quantile interval of per-fold differences)"
                     : "fixed";
  }
};

Owned<bcv_scores> load_scores(const std::string& path) {
  bcv_scores* s = nullptr;
  check(bcv_scores_load(path.c_str(), &s), path);
  return Owned<bcv_scores>(s);
}

Owned<bcv_scores> empty_scores() {
  bcv_scores* s = nullptr;
  check(bcv_scores_create(&s), "scores");
  return Owned<bcv_scores>(s);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Failure(kIo, "cannot write " + path);
  out << text;
  out.close();
  if (!out) throw Failure(kIo, "failed writing " + path);
}

std::string report_row(const std::string& a, const std::string& b,
                       const std::string& metric, const bcv_triple& t,
                       double rope) {
  std::size_t needed = 0;
  bcv_report_row(a.c_str(), b.c_str(), metric.c_str(), &t, rope, nullptr, 0,
                 &needed);
  std::string row(needed + 1, '\0');
  check(bcv_report_row(a.c_str(), b.c_str(), metric.c_str(), &t, rope,
                       row.data(), row.size(), &needed),
        "report row");
  row.resize(needed);
  return row;
}

std::string diagnostics_csv(const bcv_posterior* post) {
  std::string out = "parameter,r_hat,ess\n";
  for (std::size_t i = 0; i < bcv_posterior_diagnostic_count(post); ++i) {
    const char* name = nullptr;
    double r_hat = 0.0;
    double ess = 0.0;
    check(bcv_posterior_diagnostic(post, i, &name, &r_hat, &ess), "diagnostics");
    out += std::string(name) + "," + fmt(r_hat) + "," + fmt(ess) + "\n";
  }
  return out;
}

// ---- split ---------------------------------------------------------------

struct SplitArgs {
  std::optional<std::size_t> n;
  std::string corpus;
  std::size_t k = 10;
  std::size_t m = 20;
  std::uint64_t seed = 1;
  std::string out;
};

int run_split(const SplitArgs& a, const CLI::App& sub) {
  Manifest manifest("split", a.out);
  manifest.config(sub);
  std::size_t n = a.n.value_or(0);
  if (!a.corpus.empty()) {
    bcv_corpus* c = nullptr;
    check(bcv_corpus_load(a.corpus.c_str(), &c), a.corpus);
    Owned<bcv_corpus> corpus(c);
    n = bcv_corpus_sentence_count(corpus.get());
    manifest.input(a.corpus);
  }
  bcv_plan* p = nullptr;
  check(bcv_plan_create(n, a.k, a.m, a.seed, &p), "split");
  Owned<bcv_plan> plan(p);
  check(bcv_plan_save(plan.get(), a.out.c_str(), manifest.ref().c_str()), a.out);
  manifest.set("seed", std::to_string(a.seed));
  manifest.set("n_items", std::to_string(n));
  manifest.output(a.out);
  manifest.write();
  return kOk;
}

// ---- score ---------------------------------------------------------------

struct ScoreArgs {
  std::string plan;
  std::string corpus;
  std::string dataset;
  std::string system;
  std::string command;
  std::size_t workers = default_workers();
  std::string out;
  bool append = false;
  std::string vocab_from = "train";
  std::string work_dir;
  bool keep_files = false;
};

int run_score(const ScoreArgs& a, const CLI::App& sub) {
  Manifest manifest("score", a.out);
  manifest.config(sub);
  bcv_plan* p = nullptr;
  check(bcv_plan_load(a.plan.c_str(), &p), a.plan);
  Owned<bcv_plan> plan(p);
  manifest.input(a.plan);
  bcv_corpus* c = nullptr;
  check(bcv_corpus_load(a.corpus.c_str(), &c), a.corpus);
  Owned<bcv_corpus> corpus(c);
  manifest.input(a.corpus);

  auto scores = empty_scores();
  if (a.append && fs::exists(a.out)) {
    manifest.input(a.out);
    scores = load_scores(a.out);
  }
  const std::string dataset =
      a.dataset.empty() ? fs::path(a.corpus).stem().string() : a.dataset;
  bcv_external_options opts{};
  opts.dataset = dataset.c_str();
  opts.system = a.system.c_str();
  opts.command = a.command.c_str();
  opts.workers = a.workers;
  opts.work_dir = a.work_dir.c_str();
  opts.vocab_includes_validation = a.vocab_from == "train+validation" ? 1 : 0;
  opts.keep_files = a.keep_files ? 1 : 0;
  check(bcv_run_external(plan.get(), corpus.get(), &opts, scores.get()),
        "scoring " + a.system + " on " + dataset);
  check(bcv_scores_save(scores.get(), a.out.c_str(), manifest.ref().c_str()),
        a.out);
  manifest.set("dataset", dataset);
  manifest.output(a.out);
  std::cout << "scored " << a.system << " on " << dataset << ": "
            << bcv_scores_size(scores.get()) << " rows in " << a.out << '\n';
  manifest.write();
  return kOk;
}

// ---- compare -------------------------------------------------------------

struct CompareArgs {
  std::string scores;
  std::string a;
  std::string b;
  std::string metric = "token";
  std::string out;
  std::string chains_out;
  bool ttest = false;
  ModelFlags model;
};

int run_ttests(const CompareArgs& a, const bcv_diffs* diffs, double rope,
               Manifest& manifest) {
  std::string text = "# manifest: " + manifest.ref() + "\n";
  text += "dataset,p_left,p_rope,p_right,verdict,location,scale,dof,rope_halfwidth\n";
  for (std::size_t i = 0; i < bcv_diffs_count(diffs); ++i) {
    bcv_ttest_result r{};
    check(bcv_correlated_ttest(diffs, i, rope, &r), "t-test");
    const std::string ds = bcv_diffs_dataset(diffs, i);
    text += ds + "," + fmt(r.p_left) + "," + fmt(r.p_rope) + "," +
            fmt(r.p_right) + "," + bcv_verdict_name(r.verdict) + "," +
            fmt(r.location) + "," + fmt(r.scale) + "," + fmt(r.dof) + "," +
            fmt(rope) + "\n";
    std::cout << a.a << " vs " << a.b << " (" << a.metric << ", " << ds
              << "): p_left=" << fmt(r.p_left, "%.3f")
              << " p_rope=" << fmt(r.p_rope, "%.3f")
              << " p_right=" << fmt(r.p_right, "%.3f")
              << " verdict=" << bcv_verdict_name(r.verdict) << '\n';
  }
  write_text(a.out, text);
  manifest.output(a.out);
  manifest.write();
  return kOk;
}

int run_compare(const CompareArgs& a, const CLI::App& sub) {
  Manifest manifest("compare", a.out);
  manifest.config(sub);
  auto scores = load_scores(a.scores);
  manifest.input(a.scores);
  auto diffs = a.model.diffs(scores.get(), a.a, a.b, a.metric);
  const double rope = a.model.rope_for(diffs.get());
  manifest.set("rope_halfwidth", fmt(rope, "%.17g"));
  manifest.set("rope_mode", a.model.rope_mode());
  manifest.set("seed", std::to_string(a.model.seed));
  if (a.ttest) return run_ttests(a, diffs.get(), rope, manifest);

  const auto cfg = a.model.config();
  bcv_posterior* p = nullptr;
  const bcv_status fit_status = bcv_fit(diffs.get(), &cfg, &p);
  if (fit_status != BCV_ERR_NOT_CONVERGED) {
    if (fit_status == BCV_ERR_TOO_FEW_DATASETS) {
      throw Failure(kUsage, std::string(bcv_last_error()) +
                                " (use --ttest for a single dataset)");
    }
    check(fit_status, "fit");
  }
  Owned<bcv_posterior> post(p);
  bcv_posterior_set_meta(post.get(), "system_a", a.a.c_str());
  bcv_posterior_set_meta(post.get(), "system_b", a.b.c_str());
  bcv_posterior_set_meta(post.get(), "metric", a.metric.c_str());
  bcv_posterior_set_meta(post.get(), "rope_halfwidth", fmt(rope, "%.17g").c_str());
  bcv_posterior_set_meta(post.get(), "rope_mode", a.model.rope_mode().c_str());

  bcv_triple t{};
  check(bcv_tally(post.get(), rope, &t), "tally");
  write_text(a.out, "# manifest: " + manifest.ref() + "\n" +
                        bcv_report_header() + "\n" +
                        report_row(a.a, a.b, a.metric, t, rope) + "\n");
  manifest.output(a.out);

  const std::string chains = a.chains_out.empty() ? a.out + ".chains.csv" : a.chains_out;
  const std::string meta = chains + ".meta";
  check(bcv_posterior_save(post.get(), chains.c_str(), meta.c_str(),
                           manifest.ref().c_str()),
        chains);
  manifest.output(chains);
  manifest.output(meta);
  const std::string diag = a.out + ".diagnostics.csv";
  write_text(diag, "# manifest: " + manifest.ref() + "\n" + diagnostics_csv(post.get()));
  manifest.output(diag);

  const bool converged = bcv_posterior_converged(post.get()) != 0;
  manifest.set("converged", converged ? "true" : "false");
  std::cout << a.a << " vs " << a.b << " (" << a.metric
            << "): p_left=" << fmt(t.p_left, "%.3f")
            << " p_rope=" << fmt(t.p_rope, "%.3f")
            << " p_right=" << fmt(t.p_right, "%.3f")
            << " verdict=" << bcv_verdict_name(t.verdict) << '\n';
  if (!converged) std::cerr << "warning: chains did not converge (R-hat > 1.05)\n";
  manifest.write();
  return converged ? kOk : kNotConverged;
}

// ---- rank ----------------------------------------------------------------

struct RankArgs {
  std::string scores;
  std::string metric = "token";
  std::vector<std::string> systems;
  std::string out;
  ModelFlags model;
};

int run_rank(const RankArgs& a, const CLI::App& sub) {
  Manifest manifest("rank", a.out);
  manifest.config(sub);
  auto scores = load_scores(a.scores);
  manifest.input(a.scores);
  std::vector<std::string> systems = a.systems;
  if (systems.empty()) {
    for (std::size_t i = 0; i < bcv_scores_system_count(scores.get()); ++i) {
      systems.emplace_back(bcv_scores_system_name(scores.get(), i));
    }
  }
  if (systems.size() < 2) {
    throw Failure(kUsage, "rank needs at least two systems");
  }
  manifest.set("seed", std::to_string(a.model.seed));
  manifest.set("rope_mode", a.model.rope_mode());

  std::string table = "# manifest: " + manifest.ref() + "\n" +
                      bcv_report_header() + "\n";
  std::vector<bcv_pair_verdict> pairs;
  bool all_converged = true;
  const auto cfg = a.model.config();
  for (std::size_t i = 0; i < systems.size(); ++i) {
    for (std::size_t j = i + 1; j < systems.size(); ++j) {
      auto diffs = a.model.diffs(scores.get(), systems[i], systems[j], a.metric);
      const double rope = a.model.rope_for(diffs.get());
      bcv_posterior* p = nullptr;
      const bcv_status s = bcv_fit(diffs.get(), &cfg, &p);
      if (s != BCV_ERR_NOT_CONVERGED) check(s, "fit " + systems[i] + " - " + systems[j]);
      Owned<bcv_posterior> post(p);
      if (!bcv_posterior_converged(post.get())) {
        all_converged = false;
        std::cerr << "warning: " << systems[i] << " vs " << systems[j]
                  << " did not converge\n";
      }
      bcv_triple t{};
      check(bcv_tally(post.get(), rope, &t), "tally");
      table += report_row(systems[i], systems[j], a.metric, t, rope) + "\n";
      pairs.push_back({systems[i].c_str(), systems[j].c_str(), t.verdict});
      std::cout << systems[i] << " vs " << systems[j]
                << ": p_left=" << fmt(t.p_left, "%.3f")
                << " p_rope=" << fmt(t.p_rope, "%.3f")
                << " p_right=" << fmt(t.p_right, "%.3f")
                << " verdict=" << bcv_verdict_name(t.verdict) << '\n';
    }
  }
  write_text(a.out, table);
  manifest.output(a.out);

  std::vector<const char*> names;
  for (const auto& s : systems) names.push_back(s.c_str());
  bcv_ranking* r = nullptr;
  check(bcv_rank(names.data(), names.size(), pairs.data(), pairs.size(), &r),
        "rank");
  Owned<bcv_ranking> ranking(r);
  std::string text = "# manifest: " + manifest.ref() + "\n";
  for (std::size_t i = 0; i < bcv_ranking_edge_count(ranking.get()); ++i) {
    text += std::string("edge: ") + bcv_ranking_edge(ranking.get(), i) + "\n";
  }
  if (bcv_ranking_consistent(ranking.get())) {
    text += std::string("chain: ") + bcv_ranking_chain(ranking.get()) + "\n";
    std::cout << a.metric << ": " << bcv_ranking_chain(ranking.get()) << '\n';
    manifest.set("chain", bcv_ranking_chain(ranking.get()));
  } else {
    for (std::size_t i = 0; i < bcv_ranking_issue_count(ranking.get()); ++i) {
      text += std::string("inconsistent: ") + bcv_ranking_issue(ranking.get(), i) + "\n";
      std::cout << "inconsistent: " << bcv_ranking_issue(ranking.get(), i) << '\n';
    }
  }
  const std::string ranking_path = a.out + ".ranking.txt";
  write_text(ranking_path, text);
  manifest.output(ranking_path);
  manifest.write();
  return all_converged ? kOk : kNotConverged;
}

// ---- plot ----------------------------------------------------------------

struct PlotArgs {
  std::string chains;
  std::string meta;
  std::optional<double> rope;
  std::string label_a;
  std::string label_b;
  std::string title;
  std::string out;
};

int run_plot(const PlotArgs& a, const CLI::App& sub) {
  Manifest manifest("plot", a.out);
  manifest.config(sub);
  const std::string meta = a.meta.empty() ? a.chains + ".meta" : a.meta;
  bcv_posterior* p = nullptr;
  check(bcv_posterior_load(a.chains.c_str(), meta.c_str(), &p), a.chains);
  Owned<bcv_posterior> post(p);
  manifest.input(a.chains);
  manifest.input(meta);

  auto meta_or = [&](const std::string& given, const char* key) {
    return given.empty() ? std::string(bcv_posterior_meta(post.get(), key)) : given;
  };
  double rope = 0.0;
  if (a.rope) {
    rope = *a.rope;
  } else {
    const std::string stored = bcv_posterior_meta(post.get(), "rope_halfwidth");
    if (stored.empty()) throw Failure(kUsage, "no --rope given and none recorded in " + meta);
    rope = std::stod(stored);
  }
  const std::string sys_a = meta_or(a.label_a, "system_a");
  const std::string sys_b = meta_or(a.label_b, "system_b");
  std::string title = a.title;
  if (title.empty() && !sys_a.empty()) {
    title = sys_a + " vs " + sys_b;
    const std::string metric = bcv_posterior_meta(post.get(), "metric");
    if (!metric.empty()) title += " (" + metric + ")";
  }
  check(bcv_plot_svg(post.get(), rope, sys_b.empty() ? "B" : sys_b.c_str(),
                     sys_a.empty() ? "A" : sys_a.c_str(), title.c_str(),
                     a.out.c_str(), manifest.ref().c_str()),
        a.out);
  manifest.set("rope_halfwidth", fmt(rope, "%.17g"));
  manifest.output(a.out);
  manifest.write();
  return kOk;
}

// ---- generate ------------------------------------------------------------

struct GenerateArgs {
  bcv_generate_params params{0.0, 0.0, 5.0, 8, 10, 10, 0.0, 0.005, 0.02, 1};
  std::optional<double> rho;
  std::string a = "A";
  std::string b = "B";
  std::string metric = "token";
  double base = 0.9;
  std::string out;
  bool append = false;
  bool only_a = false;
};

int run_generate(GenerateArgs a, const CLI::App& sub) {
  Manifest manifest("generate", a.out);
  manifest.config(sub);
  a.params.rho = a.rho.value_or(1.0 / static_cast<double>(a.params.k));
  bcv_diffs* d = nullptr;
  check(bcv_generate(&a.params, &d), "generate");
  Owned<bcv_diffs> diffs(d);
  auto scores = empty_scores();
  if (a.append && fs::exists(a.out)) {
    manifest.input(a.out);
    scores = load_scores(a.out);
  }
  check(bcv_diffs_to_scores(diffs.get(), a.a.c_str(),
                            a.only_a ? nullptr : a.b.c_str(),
                            a.metric.c_str(), a.base, scores.get()),
        "generate");
  check(bcv_scores_save(scores.get(), a.out.c_str(), manifest.ref().c_str()), a.out);
  manifest.set("seed", std::to_string(a.params.seed));
  manifest.output(a.out);
  manifest.write();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian comparison of systems under repeated k-fold cross-validation"};
  app.set_version_flag("--version", std::string(bcv_version()));
  app.require_subcommand(1);

  SplitArgs split;
  auto* s = app.add_subcommand("split", "write a repeated k-fold split plan");
  auto* n_opt = s->add_option("--n", split.n, "number of items");
  auto* c_opt = s->add_option("--corpus", split.corpus, "count sentences of this corpus")
                    ->check(CLI::ExistingFile);
  n_opt->excludes(c_opt);
  s->add_option("--k", split.k, "folds")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
      ->capture_default_str();
  s->add_option("--m", split.m, "repetitions")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}))
      ->capture_default_str();
  s->add_option("--seed", split.seed, "random seed")->capture_default_str();
  s->add_option("--out", split.out, "plan file")->required();

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "run an external tagger over a plan");
  sc->add_option("--plan", score.plan)->required()->check(CLI::ExistingFile);
  sc->add_option("--corpus", score.corpus, "gold corpus")->required()->check(CLI::ExistingFile);
  sc->add_option("--dataset", score.dataset, "dataset id (default: corpus stem)");
  sc->add_option("--system", score.system, "system id")->required();
  sc->add_option("--command", score.command,
                 "shell command using {train} {validation} {eval} {output}")
      ->required();
  sc->add_option("--workers", score.workers)->check(CLI::PositiveNumber)->capture_default_str();
  sc->add_option("--out", score.out, "score CSV")->required();
  sc->add_flag("--append", score.append, "merge into an existing score CSV");
  sc->add_option("--vocab-from", score.vocab_from, "vocabulary for OOV accuracy")
      ->check(CLI::IsMember({"train", "train+validation"}))
      ->capture_default_str();
  sc->add_option("--work-dir", score.work_dir, "directory for fold files");
  sc->add_flag("--keep-files", score.keep_files, "keep fold files");

  CompareArgs compare;
  auto* cp = app.add_subcommand("compare", "compare two systems across datasets");
  cp->add_option("--scores", compare.scores)->required()->check(CLI::ExistingFile);
  cp->add_option("--a", compare.a, "system A")->required();
  cp->add_option("--b", compare.b, "system B")->required();
  cp->add_option("--metric", compare.metric)->capture_default_str();
  cp->add_option("--out", compare.out, "report CSV")->required();
  cp->add_option("--chains-out", compare.chains_out, "posterior chains CSV");
  cp->add_flag("--ttest", compare.ttest, "per-dataset correlated t-test instead of the hierarchical fit");
  compare.model.attach(cp);

  RankArgs rank;
  auto* rk = app.add_subcommand("rank", "pairwise comparison of all systems");
  rk->add_option("--scores", rank.scores)->required()->check(CLI::ExistingFile);
  rk->add_option("--metric", rank.metric)->capture_default_str();
  rk->add_option("--systems", rank.systems, "systems to rank (default: all)");
  rk->add_option("--out", rank.out, "pairwise report CSV")->required();
  rank.model.attach(rk);

  PlotArgs plot;
  auto* pl = app.add_subcommand("plot", "simplex plot of posterior draws");
  pl->add_option("--chains", plot.chains)->required()->check(CLI::ExistingFile);
  pl->add_option("--meta", plot.meta, "chain metadata (default: <chains>.meta)");
  pl->add_option("--rope", plot.rope)->check(CLI::NonNegativeNumber);
  pl->add_option("--a", plot.label_a, "label of system A");
  pl->add_option("--b", plot.label_b, "label of system B");
  pl->add_option("--title", plot.title);
  pl->add_option("--out", plot.out, "SVG file")->required();

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "synthetic scores from the hierarchical model");
  g->add_option("--delta0", gen.params.delta0)->capture_default_str();
  g->add_option("--sigma0", gen.params.sigma0)->check(CLI::NonNegativeNumber)->capture_default_str();
  g->add_option("--nu", gen.params.nu)->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--q", gen.params.q, "datasets")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--m", gen.params.m, "repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--k", gen.params.k, "folds")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
      ->capture_default_str();
  g->add_option("--rho", gen.rho, "fold correlation (default 1/k)")->check(CLI::Range(0.0, 0.999999));
  g->add_option("--sigma-min", gen.params.sigma_min)->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--sigma-max", gen.params.sigma_max)->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--seed", gen.params.seed)->capture_default_str();
  g->add_option("--a", gen.a)->capture_default_str();
  g->add_option("--b", gen.b)->capture_default_str();
  g->add_option("--metric", gen.metric)->capture_default_str();
  g->add_option("--base", gen.base, "score of system B")->capture_default_str();
  g->add_option("--out", gen.out, "score CSV")->required();
  g->add_flag("--append", gen.append, "merge into an existing score CSV");
  g->add_flag("--only-a", gen.only_a, "do not write the system B rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) {
      if (!split.n && split.corpus.empty()) {
        throw Failure(kUsage, "split: one of --n or --corpus is required");
      }
      return run_split(split, *s);
    }
    if (sc->parsed()) return run_score(score, *sc);
    if (cp->parsed()) return run_compare(compare, *cp);
    if (rk->parsed()) return run_rank(rank, *rk);
    if (pl->parsed()) return run_plot(plot, *pl);
    if (g->parsed()) return run_generate(gen, *g);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
