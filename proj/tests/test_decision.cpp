#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "baycv/decision.hpp"
#include "baycv/error.hpp"
#include "baycv/model.hpp"
#include "baycv/plot.hpp"
#include "oracles.hpp"

using namespace baycv;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

// Two chains; draws split evenly.
PosteriorChains make_chains(const std::vector<double>& d0, const std::vector<double>& s0,
                            const std::vector<double>& nu, double constant = 1.0) {
  const std::size_t half = d0.size() / 2;
  auto split = [&](const std::string& name, const std::vector<double>& v) {
    return Trace{name, {std::vector<double>(v.begin(), v.begin() + half),
                        std::vector<double>(v.begin() + half, v.begin() + 2 * half)}};
  };
  PosteriorChains c;
  c.traces = {split("delta0", d0), split("sigma0", s0), split("nu", nu)};
  c.standardization_constant = constant;
  return c;
}

struct Draws {
  std::vector<double> d0, s0, nu;
};

Draws random_draws(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> loc(0.0, 0.02);
  std::uniform_real_distribution<double> scale(0.001, 0.05), dof(1.0, 60.0);
  Draws d;
  for (std::size_t i = 0; i < n; ++i) {
    d.d0.push_back(loc(gen));
    d.s0.push_back(scale(gen));
    d.nu.push_back(dof(gen));
  }
  return d;
}

std::vector<double> negate(std::vector<double> v) {
  for (auto& x : v) x = -x;
  return v;
}

}  // namespace

TEST_CASE("region_probs matches quadrature") {
  const auto p = region_probs(0.02, 0.01, 5.0, RopeInterval(0.01));
  const auto q = oracle::t_regions(0.02, 0.01, 5.0, 0.01);
  CHECK(std::abs(p.left - q.left) < 1e-8);
  CHECK(std::abs(p.rope - q.rope) < 1e-8);
  CHECK(std::abs(p.right - q.right) < 1e-8);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> loc(-0.05, 0.05), scale(0.002, 0.05), dof(1.0, 50.0), r(0.0, 0.03);
  for (int i = 0; i < 200; ++i) {
    const double l = loc(gen), s = scale(gen), d = dof(gen), w = r(gen);
    const auto a = region_probs(l, s, d, RopeInterval(w));
    const auto b = oracle::t_regions(l, s, d, w);
    CHECK(std::abs(a.left - b.left) < 1e-8);
    CHECK(std::abs(a.rope - b.rope) < 1e-8);
    CHECK(std::abs(a.right - b.right) < 1e-8);
    CHECK(std::abs(a.left + a.rope + a.right - 1.0) < 1e-12);
  }
}

TEST_CASE("region_probs special cases") {
  const auto sym = region_probs(0.0, 0.03, 4.0, RopeInterval(0.01));
  CHECK(sym.left == doctest::Approx(sym.right).epsilon(1e-14));
  CHECK(region_probs(0.01, 0.03, 4.0, RopeInterval(0.0)).rope == 0.0);
  const auto point = region_probs(0.005, 0.0, 4.0, RopeInterval(0.01));
  CHECK(point.rope == 1.0);
  CHECK(region_probs(-0.02, 0.0, 4.0, RopeInterval(0.01)).left == 1.0);
  CHECK(code_of([] { RopeInterval(-0.1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("argmax tie rule") {
  CHECK(RegionProbs{0.4, 0.4, 0.2}.argmax() == Verdict::Rope);
  CHECK(RegionProbs{0.4, 0.2, 0.4}.argmax() == Verdict::Left);
  CHECK(RegionProbs{0.2, 0.4, 0.4}.argmax() == Verdict::Rope);
  CHECK(RegionProbs{0.1, 0.2, 0.7}.argmax() == Verdict::Right);
  CHECK(make_triple(3, 3, 3).verdict == Verdict::Rope);
  CHECK(make_triple(4, 1, 4).verdict == Verdict::Left);
  CHECK(parse_verdict(to_string(Verdict::Right)) == Verdict::Right);
}

TEST_CASE("tally: unanimous draws") {
  const std::vector<double> d0(10, 0.0), s0(10, 0.001), nu(10, 5.0);
  const auto t = tally(make_chains(d0, s0, nu), RopeInterval(0.01));
  CHECK(t.n_rope == 10);
  CHECK(t.p_left == 0.0);
  CHECK(t.p_rope == 1.0);
  CHECK(t.p_right == 0.0);
  CHECK(t.verdict == Verdict::Rope);
}

TEST_CASE("tally: rope is rescaled by the standardization constant") {
  const std::vector<double> d0(10, 0.5), s0(10, 0.01), nu(10, 5.0);
  CHECK(tally(make_chains(d0, s0, nu, 1.0), RopeInterval(0.01)).verdict == Verdict::Right);
  CHECK(tally(make_chains(d0, s0, nu, 0.01), RopeInterval(0.01)).verdict == Verdict::Rope);
}

TEST_CASE("tally: algebraic properties on random chains") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> rope(0.0, 0.04), factor(0.01, 100.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 * (1 + gen() % 40);
    const auto d = random_draws(gen, n);
    const RopeInterval r(rope(gen));
    const auto t = tally(make_chains(d.d0, d.s0, d.nu), r);
    CHECK(t.n_left + t.n_rope + t.n_right == t.n_samples);
    CHECK(t.n_samples == n);
    CHECK(t.p_rope == static_cast<double>(t.n_rope) / static_cast<double>(n));

    const auto f = tally(make_chains(negate(d.d0), d.s0, d.nu), r);
    CHECK(f.n_left == t.n_right);
    CHECK(f.n_rope == t.n_rope);
    CHECK(f.n_right == t.n_left);

    const auto wider = tally(make_chains(d.d0, d.s0, d.nu), RopeInterval(r.halfwidth * 1.5 + 0.001));
    CHECK(wider.n_rope >= t.n_rope);

    const double c = factor(gen);
    std::vector<double> d0c = d.d0, s0c = d.s0;
    for (auto& v : d0c) v *= c;
    for (auto& v : s0c) v *= c;
    const auto scaled = tally(make_chains(d0c, s0c, d.nu), RopeInterval(r.halfwidth * c));
    CHECK(scaled.verdict == t.verdict);
  }
}

TEST_CASE("tally on a fit to null data keeps mass in the rope") {
  const std::vector<DifferenceSeries> zeros{DifferenceSeries("a", std::vector<double>(20, 0.0), 0.1, 2, 10),
                                            DifferenceSeries("b", std::vector<double>(20, 0.0), 0.1, 2, 10)};
  ModelConfig cfg;
  cfg.samples_per_chain = 5000;
  cfg.seed = 6;
  const auto post = fit(zeros, cfg);
  auto d0 = post.trace("delta0").flatten();
  const double mean = std::accumulate(d0.begin(), d0.end(), 0.0) / static_cast<double>(d0.size());
  double ss = 0.0;
  for (double v : d0) ss += (v - mean) * (v - mean);
  const double spread = std::sqrt(ss / static_cast<double>(d0.size() - 1)) * post.standardization_constant;
  const auto t = tally(post, RopeInterval(2.0 * spread));
  CHECK(t.p_rope > 0.5);
}

TEST_CASE("simplex coordinates") {
  const auto l = simplex_coordinates(1.0, 0.0, 0.0);
  CHECK(l.x == 0.0);
  CHECK(l.y == 0.0);
  const auto top = simplex_coordinates(0.0, 1.0, 0.0);
  CHECK(top.x == doctest::Approx(0.5));
  CHECK(top.y == doctest::Approx(std::sqrt(3.0) / 2.0));
  const auto r = simplex_coordinates(0.0, 0.0, 1.0);
  CHECK(r.x == doctest::Approx(1.0));
  const auto mid = simplex_coordinates(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
  CHECK(mid.x == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mid.y == doctest::Approx(std::sqrt(3.0) / 6.0).epsilon(1e-14));
  const auto t = simplex_coordinates(make_triple(0, 0, 5));
  CHECK(t.x == doctest::Approx(1.0));
}

TEST_CASE("rope_from_ci95") {
  std::vector<double> x(101);
  std::iota(x.begin(), x.end(), -50.0);
  const std::vector<DifferenceSeries> s{DifferenceSeries("a", {x.begin(), x.begin() + 50}, 0.0, 1, 50),
                                        DifferenceSeries("b", {x.begin() + 50, x.end()}, 0.0, 1, 51)};
  // Type-7 quantiles of -50..50 at 2.5% and 97.5% are -47.5 and 47.5.
  CHECK(rope_from_ci95(s) == doctest::Approx(47.5));
  CHECK(code_of([] { rope_from_ci95({}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("rank examples") {
  const auto all = rank({"A", "B", "C"}, {{"A", "B", Verdict::Rope}, {"A", "C", Verdict::Rope}, {"B", "C", Verdict::Rope}});
  CHECK(all.consistent);
  CHECK(all.chain == "A ≈ B ≈ C");

  const auto tagger = rank({"Collins", "LAPOS", "TnT"}, {{"TnT", "Collins", Verdict::Left},
                                                         {"Collins", "LAPOS", Verdict::Rope},
                                                         {"TnT", "LAPOS", Verdict::Left}});
  CHECK(tagger.consistent);
  CHECK(tagger.chain == "TnT < Collins ≈ LAPOS");
  CHECK(tagger.edges.front() == "TnT < Collins");

  const auto flipped = rank({"X", "Y"}, {{"Y", "X", Verdict::Right}});
  CHECK(flipped.chain == "X < Y");

  const auto cyc = rank({"A", "B", "C"}, {{"A", "B", Verdict::Left}, {"B", "C", Verdict::Left}, {"C", "A", Verdict::Left}});
  CHECK_FALSE(cyc.consistent);
  CHECK(cyc.chain.empty());
  REQUIRE(cyc.inconsistencies.size() == 1);
  const auto& text = cyc.inconsistencies.front();
  CHECK(text.find("cycle") != std::string::npos);
  for (const char* name : {"{A}", "{B}", "{C}"}) CHECK(text.find(name) != std::string::npos);

  const auto equiv_conflict = rank({"A", "B", "C"}, {{"A", "B", Verdict::Rope}, {"B", "C", Verdict::Rope}, {"A", "C", Verdict::Left}});
  CHECK_FALSE(equiv_conflict.consistent);

  CHECK(code_of([] { rank({"A", "B", "C"}, {{"A", "B", Verdict::Rope}, {"B", "C", Verdict::Rope}}); }) ==
        ErrorCode::MissingPair);
  CHECK(code_of([] { rank({"A"}, {}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("report row") {
  ReportRow row{"A", "B", "token", make_triple(1, 2, 1), 0.01};
  CHECK(format_report_row(row) == "A,B,token,0.25,0.5,0.25,rope,4,0.01");
  CHECK(std::string(kReportHeader) == "system_a,system_b,metric,p_left,p_rope,p_right,verdict,n_samples,rope_halfwidth");
}

TEST_CASE("simplex plot") {
  GenerateParams g;
  g.q = 4;
  g.m = 3;
  g.sigma0 = 0.005;
  g.sigma_min = 0.01;
  g.sigma_max = 0.02;
  g.seed = 31;
  ModelConfig cfg;
  cfg.samples_per_chain = 2500;
  cfg.seed = 2;
  const auto post = fit(generate(g), cfg);
  const RopeInterval r(0.01);
  const auto points = posterior_simplex_points(post, r);
  CHECK(points.size() == post.n_draws());
  double mx = 0.0;
  for (const auto& p : points) mx += p.x;
  CHECK(std::abs(mx / static_cast<double>(points.size()) - 0.5) < 0.05);

  const SimplexLabels labels{"B", "A", "rope", "A vs B"};
  std::ostringstream a, b;
  write_simplex_svg(a, points, tally(post, r), labels, "m.manifest");
  write_simplex_svg(b, points, tally(post, r), labels, "m.manifest");
  CHECK(a.str() == b.str());
  CHECK(a.str().find("<svg") != std::string::npos);
  CHECK(a.str().find("A vs B") != std::string::npos);

  const std::vector<double> d0(20, -1.0), s0(20, 1e-3), nu(20, 5.0);
  const auto left = make_chains(d0, s0, nu);
  const auto t = tally(left, r);
  CHECK(t.p_left == 1.0);
  for (const auto& p : posterior_simplex_points(left, r)) {
    CHECK(p.x == doctest::Approx(0.0));
    CHECK(p.y == doctest::Approx(0.0));
  }
}
