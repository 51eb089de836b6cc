#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: dense linear algebra for the Gaussian density, adaptive
// quadrature for t probabilities, plain Monte Carlo for region masses.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline double dense_mvn_loglik(const std::vector<double>& x, double mean,
                               double variance, double rho) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(n, n, rho * variance);
  cov.diagonal().setConstant(variance);
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = x[static_cast<std::size_t>(i)] - mean;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd z = llt.matrixL().solve(r);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + logdet +
                 z.squaredNorm());
}

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

inline double t_pdf(double x, double loc, double scale, double dof) {
  const double z = (x - loc) / scale;
  const double logc = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                      0.5 * std::log(dof * std::numbers::pi) - std::log(scale);
  return std::exp(logc - (dof + 1.0) / 2.0 * std::log1p(z * z / dof));
}

// Mass of t(loc, scale, dof) on [a, b] by adaptive Gauss-Kronrod.
inline double t_mass(double a, double b, double loc, double scale, double dof) {
  if (b <= a) return 0.0;
  auto f = [&](double t) { return t_pdf(t, loc, scale, dof); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12, &err);
}

// P(T <= x) using symmetry about the location and quadrature over the
// finite half.
inline double t_cdf(double x, double loc, double scale, double dof) {
  if (x >= loc) return 0.5 + t_mass(loc, x, loc, scale, dof);
  return 0.5 - t_mass(x, loc, loc, scale, dof);
}

struct Masses {
  double left, rope, right;
};

// Region masses of t(loc, scale, dof) against [-r, r] by quadrature.
inline Masses t_regions(double loc, double scale, double dof, double r) {
  const double lo = t_cdf(-r, loc, scale, dof);
  const double hi = t_cdf(r, loc, scale, dof);
  return {lo, hi - lo, 1.0 - hi};
}

// Region frequencies of n Monte Carlo draws of t(loc, scale, dof).
inline Masses t_regions_mc(double loc, double scale, double dof, double r,
                           std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::student_t_distribution<double> t(dof);
  std::size_t left = 0, rope = 0, right = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = loc + scale * t(gen);
    if (d < -r) {
      ++left;
    } else if (d > r) {
      ++right;
    } else {
      ++rope;
    }
  }
  const double nd = static_cast<double>(n);
  return {left / nd, rope / nd, right / nd};
}

}  // namespace oracle
