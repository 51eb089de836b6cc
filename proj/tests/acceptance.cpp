// Acceptance checks: one PASS/FAIL line per criterion.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "baycv/decision.hpp"
#include "baycv/error.hpp"
#include "baycv/harness.hpp"
#include "baycv/metrics.hpp"
#include "baycv/model.hpp"
#include "baycv/stat.hpp"
#include "oracles.hpp"

using namespace baycv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Outcome ac1() {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> z;
  double worst_mvn = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + gen() % 20;
    const double lo = n > 1 ? -1.0 / (n - 1.0) : -0.9;
    std::uniform_real_distribution<double> rho(lo * 0.95, 0.95), var(0.01, 4.0);
    const double r = rho(gen), v = var(gen), mu = z(gen);
    std::vector<double> x(n);
    for (auto& e : x) e = mu + std::sqrt(v) * z(gen);
    worst_mvn = std::max(worst_mvn, std::abs(cs_mvn_loglik(x, mu, CompoundSymmetryCov(n, v, r)) -
                                             oracle::dense_mvn_loglik(x, mu, v, r)));
  }
  double worst_cdf = 0.0;
  for (double dof : {1.0, 2.0, 5.0, 30.0}) {
    for (int i = 0; i <= 100; ++i) {
      const double x = -5.0 + 0.1 * i;
      worst_cdf = std::max(worst_cdf, std::abs(t_cdf(x, StudentT(0.0, 1.0, dof)) - oracle::t_cdf(x, 0.0, 1.0, dof)));
    }
  }
  return {worst_mvn < 1e-10 && worst_cdf < 1e-10,
          fmt("max |loglik - dense| = %.2e, max |t_cdf - quadrature| = %.2e", worst_mvn, worst_cdf)};
}

PosteriorChains chains_of(const std::vector<double>& d0, const std::vector<double>& s0,
                          const std::vector<double>& nu) {
  const std::size_t h = d0.size() / 2;
  auto split = [&](const char* name, const std::vector<double>& v) {
    return Trace{name, {std::vector<double>(v.begin(), v.begin() + h), std::vector<double>(v.begin() + h, v.end())}};
  };
  PosteriorChains c;
  c.traces = {split("delta0", d0), split("sigma0", s0), split("nu", nu)};
  return c;
}

Outcome ac2() {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> loc(0.0, 0.02);
  std::uniform_real_distribution<double> scale(0.001, 0.05), dof(1.0, 60.0), rope(0.0, 0.04);
  std::size_t bad_conservation = 0, bad_antisymmetry = 0, bad_sum = 0, bad_monotone = 0;
  double worst_sum = 0.0;
  constexpr int cases = 2000;
  for (int trial = 0; trial < cases; ++trial) {
    const std::size_t n = 2 * (1 + gen() % 50);
    std::vector<double> d0(n), s0(n), nu(n);
    for (std::size_t i = 0; i < n; ++i) {
      d0[i] = loc(gen);
      s0[i] = scale(gen);
      nu[i] = dof(gen);
      const auto p = region_probs(d0[i], s0[i], nu[i], RopeInterval(rope(gen)));
      const double err = std::abs(p.left + p.rope + p.right - 1.0);
      worst_sum = std::max(worst_sum, err);
      bad_sum += err > 1e-12;
    }
    const RopeInterval r(rope(gen));
    const auto t = tally(chains_of(d0, s0, nu), r);
    bad_conservation += t.n_left + t.n_rope + t.n_right != t.n_samples || t.n_samples != n;
    auto neg = d0;
    for (auto& v : neg) v = -v;
    const auto f = tally(chains_of(neg, s0, nu), r);
    bad_antisymmetry += f.p_left != t.p_right || f.p_rope != t.p_rope || f.p_right != t.p_left;
    const auto w = tally(chains_of(d0, s0, nu), RopeInterval(r.halfwidth + rope(gen)));
    bad_monotone += w.n_rope < t.n_rope;
  }
  return {bad_conservation + bad_antisymmetry + bad_sum + bad_monotone == 0,
          fmt("%d cases: conservation %zu, antisymmetry %zu, sum %zu (max err %.1e), monotonicity %zu violations",
              cases, bad_conservation, bad_antisymmetry, bad_sum, worst_sum, bad_monotone)};
}

GenerateParams recover_params(double delta0, double sigma0, std::uint64_t seed) {
  GenerateParams g;
  g.delta0 = delta0;
  g.sigma0 = sigma0;
  g.nu = 5.0;
  g.q = 8;
  g.m = 5;
  g.k = 10;
  g.rho = 0.1;
  g.sigma_min = 0.01;
  g.sigma_max = 0.02;
  g.seed = seed;
  return g;
}

Outcome ac3() {
  const auto data = generate(recover_params(0.02, 0.005, 1));
  ModelConfig cfg;
  cfg.seed = 1;
  const auto post = fit(data, cfg);
  auto d0 = post.trace("delta0").flatten();
  const double mean = mean_of(d0) * post.standardization_constant;
  bool ok = std::abs(mean - 0.02) <= 0.005;
  std::string diag;
  for (const auto& d : post.diagnostics) {
    if (d.parameter != "delta0" && d.parameter != "sigma0" && d.parameter != "nu") continue;
    ok = ok && !d.undefined && d.r_hat < 1.05 && d.ess > 400.0;
    diag += fmt(", %s R-hat %.4f ESS %.0f", d.parameter.c_str(), d.r_hat, d.ess);
  }
  return {ok, fmt("posterior mean delta0 %.5f (truth 0.02)", mean) + diag};
}

Outcome ac4() {
  const RopeInterval rope(0.01);
  ModelConfig cfg;
  cfg.seed = 1;
  const auto hi = tally(fit(generate(recover_params(0.03, 0.002, 2)), cfg), rope);
  const auto null = tally(fit(generate(recover_params(0.0, 0.002, 3)), cfg), rope);
  return {hi.p_right >= 0.9 && null.p_rope >= 0.6,
          fmt("delta0=0.03: (%.3f, %.3f, %.3f); delta0=0: (%.3f, %.3f, %.3f)", hi.p_left, hi.p_rope, hi.p_right,
              null.p_left, null.p_rope, null.p_right)};
}

Outcome ac5() {
  std::mt19937_64 gen(55);
  std::uniform_real_distribution<double> mu(-0.03, 0.03), sd(0.005, 0.04), rho(0.0, 0.3);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const std::size_t k = 2 + gen() % 9, m = 1 + gen() % 10;
    std::normal_distribution<double> z(mu(gen), sd(gen));
    std::vector<double> x(k * m);
    for (auto& v : x) v = z(gen);
    const DifferenceSeries series("d", x, rho(gen), m, k);
    const auto post = correlated_ttest(series);
    const auto p = decide(post, RopeInterval(0.01));
    const auto mc = oracle::t_regions_mc(post.location, post.scale, post.dof, 0.01, 1000000, 100 + s);
    worst = std::max({worst, std::abs(p.left - mc.left), std::abs(p.rope - mc.rope), std::abs(p.right - mc.right)});
  }
  return {worst <= 0.01, fmt("20 series, max |analytic - Monte Carlo| = %.4f", worst)};
}

int sh(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome ac6() {
  const fs::path dir = fs::temp_directory_path() / "baycv_acceptance_protocol";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = std::string("'") + BAYCV_CLI + "'";
  const std::string stub = std::string("'") + BAYCV_STUB_TAGGER + "'";
  const std::string quiet = " > /dev/null 2>> '" + (dir / "errors.txt").string() + "'";
  for (const char* ds : {"corpus_a", "corpus_b"}) {
    const std::string corpus = std::string(BAYCV_TEST_DATA) + "/" + ds + ".tsv";
    const std::string plan = (dir / (std::string(ds) + ".plan")).string();
    if (sh(cli + " split --corpus '" + corpus + "' --k 10 --m 20 --seed 1 --out '" + plan + "'" + quiet) != 0) {
      return {false, std::string("split failed on ") + ds};
    }
    for (const char* mode : {"majority", "noisy"}) {
      const std::string cmd = "score --plan '" + plan + "' --corpus '" + corpus + "' --system " + mode +
                              " --command \"" + stub + " --mode " + mode +
                              " --train {train} --eval {eval} --output {output}\" --append --out '" +
                              (dir / "scores.csv").string() + "'";
      if (sh(cli + " " + cmd + quiet) != 0) return {false, std::string("score failed: ") + ds + "/" + mode};
    }
  }
  const auto scores = load_scores(dir / "scores.csv");
  std::size_t min_count = 1u << 30, max_count = 0;
  for (const auto& ds : scores.datasets()) {
    for (const char* sys : {"majority", "noisy"}) {
      for (const char* metric : {"token", "sentence", "oov"}) {
        std::size_t n = 0;
        for (const auto& [key, value] : scores.entries()) {
          n += key.dataset == ds && key.system == sys && key.metric == metric;
        }
        min_count = std::min(min_count, n);
        max_count = std::max(max_count, n);
      }
    }
  }
  const std::string report = (dir / "self.csv").string();
  if (sh(cli + " compare --scores '" + (dir / "scores.csv").string() + "' --a majority --b majority --out '" + report +
         "'" + quiet) != 0) {
    return {false, "self comparison failed"};
  }
  std::ifstream in(report);
  std::string line, row;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') row = line;
  }
  std::vector<std::string> f;
  std::stringstream ss(row);
  for (std::string part; std::getline(ss, part, ',');) f.push_back(part);
  if (f.size() < 7) return {false, "unreadable report row: " + row};
  const double p_rope = std::stod(f[4]);
  const bool ok = min_count == 200 && max_count == 200 && f[6] == "rope" && p_rope > 0.99;
  return {ok, fmt("scores per dataset/system/metric: %zu..%zu, self comparison verdict %s with p_rope %.4f",
                  min_count, max_count, f[6].c_str(), p_rope)};
}

using Tags = std::vector<std::vector<std::string>>;

TaggedCorpus make(const Tags& tokens, const Tags& tags) {
  std::vector<Sentence> sentences;
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    Sentence sent;
    for (std::size_t i = 0; i < tokens[s].size(); ++i) sent.push_back({tokens[s][i], tags[s][i]});
    sentences.push_back(sent);
  }
  return TaggedCorpus(sentences);
}

Outcome ac7() {
  const Tags toks{{"the", "dog"}, {"ran"}};
  const auto gold = make(toks, {{"A", "B"}, {"C"}});
  const auto pred = make(toks, {{"A", "X"}, {"C"}});
  const Tags two{{"a"}, {"b"}};
  const Tags ab{{"a", "b"}};
  const auto gab = make(ab, {{"A", "B"}});
  bool hand = token_accuracy(gold, gold) == 1.0 && token_accuracy(gold, pred) == 2.0 / 3.0 &&
              token_accuracy(make(two, {{"A"}, {"B"}}), make(two, {{"X"}, {"Y"}})) == 0.0 &&
              sentence_accuracy(gold, gold) == 1.0 && sentence_accuracy(gold, pred) == 0.5 &&
              sentence_accuracy(make({{"x", "y"}}, {{"A", "B"}}), make({{"x", "y"}}, {{"A", "C"}})) == 0.0 &&
              oov_accuracy(Vocabulary({"a"}), gab, make(ab, {{"A", "B"}})) == 1.0 &&
              oov_accuracy(Vocabulary({"a"}), gab, make(ab, {{"A", "X"}})) == 0.0;
  try {
    oov_accuracy(Vocabulary({"a", "b"}), gab, gab);
    hand = false;
  } catch (const Error& e) {
    hand = hand && e.code() == ErrorCode::NoOovTokens;
  }

  std::mt19937_64 gen(99);
  const std::vector<std::string> tagset{"A", "B", "C"};
  std::size_t violations = 0;
  std::string example;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t ns = 1 + gen() % 8;
    Tags t(ns), g(ns), p(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      const std::size_t len = 1 + gen() % 6;
      for (std::size_t i = 0; i < len; ++i) {
        t[s].push_back("w" + std::to_string(gen() % 12));
        g[s].push_back(tagset[gen() % 3]);
        p[s].push_back(gen() % 4 == 0 ? tagset[gen() % 3] : g[s].back());
      }
    }
    const double tok = token_accuracy(make(t, g), make(t, p));
    const double sen = sentence_accuracy(make(t, g), make(t, p));
    if (tok < sen) {
      if (violations == 0) example = fmt(" (first: token %.4f < sentence %.4f)", tok, sen);
      ++violations;
    }
  }
  return {hand && violations == 0,
          std::string("hand counts ") + (hand ? "exact" : "WRONG") +
              fmt("; token >= sentence violated on %zu of 1000 random corpora", violations) + example};
}

std::vector<DifferenceSeries> scaled_differences(double c) {
  GenerateParams g;
  g.delta0 = 0.003;
  g.sigma0 = 0.001;
  g.q = 8;
  g.m = 5;
  g.k = 10;
  g.rho = 0.1;
  g.sigma_min = 0.002;
  g.sigma_max = 0.004;
  g.seed = 8;
  ScoreMatrix scores;
  for (const auto& s : generate(g)) {
    for (std::size_t j = 0; j < s.n(); ++j) {
      scores.add({s.dataset_id, "A", "token", j / s.k, j % s.k}, 0.5 + c * s.x[j]);
      scores.add({s.dataset_id, "B", "token", j / s.k, j % s.k}, 0.5);
    }
  }
  return assemble_differences(scores, "A", "B", "token", RhoPolicy::fixed(0.1));
}

Outcome ac8() {
  ModelConfig cfg;
  cfg.seed = 4;
  const auto base = tally(fit(scaled_differences(1.0), cfg), RopeInterval(0.002));
  const auto big = tally(fit(scaled_differences(10.0), cfg), RopeInterval(0.02));
  const double d = std::max({std::abs(base.p_left - big.p_left), std::abs(base.p_rope - big.p_rope),
                             std::abs(base.p_right - big.p_right)});
  return {d < 0.01, fmt("x1: (%.4f, %.4f, %.4f); x10: (%.4f, %.4f, %.4f); max change %.4f", base.p_left, base.p_rope,
                        base.p_right, big.p_left, big.p_rope, big.p_right, d)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"AC1 kernel correctness", 10, ac1},       {"AC2 decision algebra", 30, ac2},
      {"AC3 generate-then-recover", 120, ac3},   {"AC4 directional soundness", 120, ac4},
      {"AC5 single-dataset consistency", 0, ac5}, {"AC6 toy-scale protocol", 60, ac6},
      {"AC7 metrics exactness", 0, ac7},         {"AC8 scale invariance", 0, ac8},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string budget;
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      budget = fmt(" over the %.0f s budget", c.budget_s);
    }
    std::printf("%s %s: %s [%.1f s%s]\n", o.pass ? "PASS" : "FAIL", c.id, o.detail.c_str(), secs, budget.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
