#pragma once

// Numerical kernels shared by the sampler and the decision engine.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace baycv {

/// Seeded 64-bit generator. Satisfies UniformRandomBitGenerator so it can
/// drive the standard distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Unbiased integer in [0, bound). Portable: does not depend on the
  /// standard library's distribution implementation.
  std::uint64_t below(std::uint64_t bound);
  double normal();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Independent reproducible stream per (seed, stream_id).
Rng rng_fork(std::uint64_t seed, std::uint64_t stream_id);

/// Location-scale Student t. A scale of exactly zero denotes the point mass
/// at the location (the degenerate limit).
struct StudentT {
  double location = 0.0;
  double scale = 1.0;
  double dof = 1.0;

  StudentT() = default;
  StudentT(double location, double scale, double dof);
};

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(T <= x). Absolute error below 1e-12.
double t_cdf(double x, const StudentT& dist);
/// P(T <= t) for the standard t with the given degrees of freedom.
double t_lower_tail(double t, double dof);
double t_log_pdf(double x, const StudentT& dist);
double t_sample(const StudentT& dist, Rng& rng);

/// Covariance with `variance` on the diagonal and rho * variance elsewhere.
class CompoundSymmetryCov {
 public:
  CompoundSymmetryCov(std::size_t n, double variance, double rho);

  std::size_t n() const { return n_; }
  double variance() const { return variance_; }
  double rho() const { return rho_; }

  /// Eigenvalue along the all-ones direction.
  double lambda_mean() const;
  /// Eigenvalue of the (n - 1)-dimensional orthogonal complement.
  double lambda_residual() const;

 private:
  std::size_t n_;
  double variance_;
  double rho_;
};

/// True when rho lies inside (-1/(n-1), 1), i.e. the covariance is
/// positive definite.
bool cs_rho_admissible(std::size_t n, double rho);

double cs_mvn_loglik(std::span<const double> x, double mean,
                     const CompoundSymmetryCov& cov);

/// Same density from sufficient statistics: sample mean and sum of squared
/// deviations about it.
double cs_mvn_loglik_stats(std::size_t n, double sample_mean,
                           double sum_sq_dev, double mean,
                           const CompoundSymmetryCov& cov);

}  // namespace baycv
