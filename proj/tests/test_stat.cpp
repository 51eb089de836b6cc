#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "baycv/error.hpp"
#include "baycv/stat.hpp"
#include "oracles.hpp"

using namespace baycv;

TEST_CASE("t_cdf closed forms and symmetry") {
  CHECK(t_cdf(1.5, StudentT(1.5, 2.0, 3.0)) == 0.5);
  CHECK(t_cdf(1.0, StudentT(0.0, 1.0, 1.0)) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(t_cdf(3.0, StudentT(1.0, 2.0, 1.0)) ==
        doctest::Approx(0.5 + std::atan(1.0) / std::numbers::pi).epsilon(1e-14));
  // dof = 2 has P(T <= t) = 1/2 + t / (2 sqrt(t^2 + 2)).
  for (double t : {-4.0, -0.3, 0.7, 2.5}) {
    CHECK(std::abs(t_cdf(t, StudentT(0.0, 1.0, 2.0)) - (0.5 + t / (2.0 * std::sqrt(t * t + 2.0)))) < 1e-13);
  }
  for (double dof : {0.5, 1.0, 3.7, 40.0, 1e6}) {
    for (double d : {0.0, 1e-9, 0.1, 1.0, 7.0, 1e5}) {
      const StudentT dist(0.3, 0.7, dof);
      CHECK(std::abs(t_cdf(0.3 - d, dist) + t_cdf(0.3 + d, dist) - 1.0) < 1e-12);
    }
  }
  const StudentT s(0.0, 1.0, 4.0);
  CHECK(t_cdf(-std::numeric_limits<double>::infinity(), s) == 0.0);
  CHECK(t_cdf(std::numeric_limits<double>::infinity(), s) == 1.0);
}

TEST_CASE("t_cdf is monotone") {
  for (double dof : {1.0, 2.0, 5.0, 30.0}) {
    const StudentT dist(0.0, 1.0, dof);
    double prev = 0.0;
    for (double x = -50.0; x <= 50.0; x += 0.01) {
      const double p = t_cdf(x, dist);
      CHECK(p >= prev);
      prev = p;
    }
  }
}

TEST_CASE("t_cdf matches quadrature") {
  CHECK(std::abs(t_cdf(2.0, StudentT(0.0, 1.0, 5.0)) - oracle::t_cdf(2.0, 0.0, 1.0, 5.0)) < 1e-10);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> loc(-1.0, 1.0), scale(0.1, 3.0), dof(0.5, 60.0),
      x(-8.0, 8.0);
  for (int i = 0; i < 200; ++i) {
    const double l = loc(gen), s = scale(gen), d = dof(gen), v = x(gen);
    CHECK(std::abs(t_cdf(v, StudentT(l, s, d)) - oracle::t_cdf(v, l, s, d)) < 1e-10);
  }
}

TEST_CASE("incomplete beta edge values") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, b) = 1 - (1 - x)^b
  CHECK(incomplete_beta(1.0, 3.5, 0.3) == doctest::Approx(1.0 - std::pow(0.7, 3.5)).epsilon(1e-14));
  CHECK(incomplete_beta(2.5, 1.5, 0.4) + incomplete_beta(1.5, 2.5, 0.6) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("StudentT validation") {
  CHECK_THROWS_AS(StudentT(0.0, -1.0, 2.0), Error);
  CHECK_THROWS_AS(StudentT(0.0, 1.0, 0.0), Error);
  CHECK_NOTHROW(StudentT(0.0, 0.0, 2.0));
  const StudentT point(0.25, 0.0, 3.0);
  CHECK(t_cdf(0.2499, point) == 0.0);
  CHECK(t_cdf(0.25, point) == 1.0);
  Rng rng(1, 0);
  CHECK(t_sample(point, rng) == 0.25);
}

TEST_CASE("t_log_pdf matches the density oracle") {
  for (double dof : {1.0, 3.3, 25.0}) {
    for (double x : {-3.0, 0.0, 0.4, 9.0}) {
      CHECK(std::exp(t_log_pdf(x, StudentT(0.2, 1.7, dof))) ==
            doctest::Approx(oracle::t_pdf(x, 0.2, 1.7, dof)).epsilon(1e-12));
    }
  }
}

TEST_CASE("t_sample moments and determinism") {
  const StudentT dist(2.0, 0.5, 30.0);
  Rng rng(7, 3);
  constexpr int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += t_sample(dist, rng);
  const double sd = 0.5 * std::sqrt(30.0 / 28.0);
  CHECK(std::abs(sum / n - 2.0) < 5.0 * sd / std::sqrt(static_cast<double>(n)));

  Rng a(5, 9), b(5, 9);
  for (int i = 0; i < 100; ++i) CHECK(t_sample(dist, a) == t_sample(dist, b));
}

TEST_CASE("rng_fork streams") {
  auto a = rng_fork(42, 0);
  auto a2 = rng_fork(42, 0);
  auto b = rng_fork(42, 1);
  const auto first_a = a();
  CHECK(first_a == a2());
  CHECK(first_a != b());

  auto s0 = rng_fork(1234, 0);
  auto s1 = rng_fork(1234, 1);
  constexpr int n = 1000000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s0.uniform();
    const double y = s1.uniform();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double cov = sxy / n - sx / n * sy / n;
  const double r = cov / std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
  CHECK(std::abs(r) < 0.01);
}

TEST_CASE("Rng helpers") {
  Rng rng(3, 4);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 600);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("compound symmetry covariance") {
  CHECK(cs_rho_admissible(5, 0.99));
  CHECK_FALSE(cs_rho_admissible(5, 1.0));
  CHECK(cs_rho_admissible(5, -0.24));
  CHECK_FALSE(cs_rho_admissible(5, -0.25));
  CHECK(cs_rho_admissible(1, -0.5));
  CHECK_THROWS_AS(CompoundSymmetryCov(5, 1.0, 1.0), Error);
  CHECK_THROWS_AS(CompoundSymmetryCov(5, 0.0, 0.1), Error);
  const CompoundSymmetryCov cov(4, 2.0, 0.25);
  CHECK(cov.lambda_mean() == doctest::Approx(2.0 * (1.0 + 3.0 * 0.25)));
  CHECK(cov.lambda_residual() == doctest::Approx(2.0 * 0.75));
}

TEST_CASE("cs_mvn_loglik reductions") {
  const std::vector<double> one{0.7};
  CHECK(cs_mvn_loglik(one, 0.2, CompoundSymmetryCov(1, 0.09, 0.0)) ==
        doctest::Approx(oracle::normal_logpdf(0.7, 0.2, 0.3)).epsilon(1e-13));
  const std::vector<double> x{0.1, -0.4, 0.9, 0.3};
  double indep = 0.0;
  for (double v : x) indep += oracle::normal_logpdf(v, 0.05, 0.5);
  CHECK(cs_mvn_loglik(x, 0.05, CompoundSymmetryCov(4, 0.25, 0.0)) == doctest::Approx(indep).epsilon(1e-13));
  CHECK_THROWS_AS(cs_mvn_loglik(x, 0.0, CompoundSymmetryCov(3, 1.0, 0.1)), Error);
}

TEST_CASE("cs_mvn_loglik matches the dense oracle") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> z;
  const std::vector<double> x6{0.3, -1.2, 0.8, 2.0, -0.1, 0.45};
  CHECK(std::abs(cs_mvn_loglik(x6, 0.2, CompoundSymmetryCov(6, 1.3, 0.1)) -
                 oracle::dense_mvn_loglik(x6, 0.2, 1.3, 0.1)) < 1e-10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + gen() % 20;
    const double lo = n > 1 ? -1.0 / (n - 1.0) : -0.9;
    std::uniform_real_distribution<double> rho(lo * 0.95, 0.95), var(0.01, 4.0);
    const double r = rho(gen), v = var(gen), mean = z(gen);
    std::vector<double> x(n);
    for (auto& e : x) e = mean + std::sqrt(v) * z(gen);
    CHECK(std::abs(cs_mvn_loglik(x, mean, CompoundSymmetryCov(n, v, r)) -
                   oracle::dense_mvn_loglik(x, mean, v, r)) < 1e-10);
  }
}

TEST_CASE("cs_mvn_loglik is exchangeable and consistent with sufficient statistics") {
  std::mt19937_64 gen(2);
  std::vector<double> x{0.5, -0.2, 1.1, 0.05, -0.7, 0.33, 0.9};
  const CompoundSymmetryCov cov(x.size(), 0.8, 0.3);
  const double ref = cs_mvn_loglik(x, 0.1, cov);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  CHECK(cs_mvn_loglik_stats(x.size(), mean, ss, 0.1, cov) == doctest::Approx(ref).epsilon(1e-13));
  for (int i = 0; i < 20; ++i) {
    std::shuffle(x.begin(), x.end(), gen);
    CHECK(cs_mvn_loglik(x, 0.1, cov) == doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("cs_mvn density integrates to one for n <= 2") {
  using boost::math::quadrature::gauss_kronrod;
  const CompoundSymmetryCov c1(1, 0.5, 0.0);
  auto f1 = [&](double a) {
    const std::vector<double> v{a};
    return std::exp(cs_mvn_loglik(v, 0.3, c1));
  };
  CHECK(gauss_kronrod<double, 61>::integrate(f1, -15.0, 15.0, 15, 1e-13) == doctest::Approx(1.0).epsilon(1e-10));

  const CompoundSymmetryCov c2(2, 0.7, 0.4);
  auto inner = [&](double a) {
    auto g = [&](double b) {
      const std::vector<double> v{a, b};
      return std::exp(cs_mvn_loglik(v, -0.2, c2));
    };
    return gauss_kronrod<double, 61>::integrate(g, -12.0, 12.0, 12, 1e-12);
  };
  CHECK(gauss_kronrod<double, 61>::integrate(inner, -12.0, 12.0, 12, 1e-11) ==
        doctest::Approx(1.0).epsilon(1e-8));
}
