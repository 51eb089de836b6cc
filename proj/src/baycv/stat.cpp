#include "baycv/stat.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "baycv/error.hpp"

namespace baycv {

namespace {

constexpr std::uint64_t kStreamTag = 0x62617963'76727367ULL;

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream),
      static_cast<std::uint32_t>(stream >> 32),
      static_cast<std::uint32_t>(kStreamTag),
      static_cast<std::uint32_t>(kStreamTag >> 32)};
  return std::mt19937_64(seq);
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// x and xc = 1 - x are passed separately so callers can supply an exact
// complement.
double incomplete_beta_impl(double a, double b, double x, double xc) {
  if (x <= 0.0) return 0.0;
  if (xc <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log(xc);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, xc) / b;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(seeded_engine(seed, stream)) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) raise(ErrorCode::InvalidArgument, "Rng::below: bound is 0");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

double Rng::normal() { return normal_(engine_); }

Rng rng_fork(std::uint64_t seed, std::uint64_t stream_id) {
  return Rng(seed, stream_id);
}

StudentT::StudentT(double location_, double scale_, double dof_)
    : location(location_), scale(scale_), dof(dof_) {
  if (!std::isfinite(location) || !std::isfinite(scale) || scale < 0.0) {
    raise(ErrorCode::InvalidArgument,
          "StudentT: location must be finite and scale >= 0");
  }
  if (!(dof > 0.0)) {
    raise(ErrorCode::InvalidArgument, "StudentT: dof must be > 0");
  }
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    raise(ErrorCode::InvalidArgument,
          "incomplete_beta: need a > 0, b > 0, 0 <= x <= 1");
  }
  return incomplete_beta_impl(a, b, x, 1.0 - x);
}

double t_lower_tail(double t, double dof) {
  if (std::isnan(t)) return t;
  if (t == -std::numeric_limits<double>::infinity()) return 0.0;
  if (t == std::numeric_limits<double>::infinity()) return 1.0;
  if (t == 0.0) return 0.5;
  const double t2 = t * t;
  const double denom = dof + t2;
  // I_{dof/(dof+t^2)}(dof/2, 1/2) is the two-sided tail mass beyond |t|.
  const double tail = incomplete_beta_impl(0.5 * dof, 0.5, dof / denom,
                                           t2 / denom);
  return t < 0.0 ? 0.5 * tail : 1.0 - 0.5 * tail;
}

double t_cdf(double x, const StudentT& dist) {
  if (dist.scale == 0.0) return x >= dist.location ? 1.0 : 0.0;
  return t_lower_tail((x - dist.location) / dist.scale, dist.dof);
}

double t_log_pdf(double x, const StudentT& dist) {
  const double nu = dist.dof;
  const double z = (x - dist.location) / dist.scale;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi) - std::log(dist.scale) -
         0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

double t_sample(const StudentT& dist, Rng& rng) {
  if (dist.scale == 0.0) return dist.location;
  std::student_t_distribution<double> standard(dist.dof);
  return dist.location + dist.scale * standard(rng);
}

bool cs_rho_admissible(std::size_t n, double rho) {
  if (!(rho < 1.0)) return false;
  if (n <= 1) return rho > -1.0;
  return rho > -1.0 / static_cast<double>(n - 1);
}

CompoundSymmetryCov::CompoundSymmetryCov(std::size_t n, double variance,
                                         double rho)
    : n_(n), variance_(variance), rho_(rho) {
  if (n == 0) raise(ErrorCode::InvalidArgument, "CompoundSymmetryCov: n = 0");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    raise(ErrorCode::InvalidArgument,
          "CompoundSymmetryCov: variance must be positive");
  }
  if (!cs_rho_admissible(n, rho)) {
    raise(ErrorCode::InvalidArgument,
          "CompoundSymmetryCov: rho=" + std::to_string(rho) +
              " outside (-1/(n-1), 1) for n=" + std::to_string(n));
  }
}

double CompoundSymmetryCov::lambda_mean() const {
  return variance_ * (1.0 + static_cast<double>(n_ - 1) * rho_);
}

double CompoundSymmetryCov::lambda_residual() const {
  return variance_ * (1.0 - rho_);
}

double cs_mvn_loglik_stats(std::size_t n, double sample_mean,
                           double sum_sq_dev, double mean,
                           const CompoundSymmetryCov& cov) {
  if (n != cov.n()) {
    raise(ErrorCode::DimensionMismatch,
          "cs_mvn_loglik: length " + std::to_string(n) +
              " does not match covariance dimension " +
              std::to_string(cov.n()));
  }
  const double nd = static_cast<double>(n);
  const double l1 = cov.lambda_mean();
  const double l2 = cov.lambda_residual();
  const double shift = sample_mean - mean;
  double log_det = std::log(l1);
  double quad = nd * shift * shift / l1;
  if (n > 1) {
    log_det += (nd - 1.0) * std::log(l2);
    quad += sum_sq_dev / l2;
  }
  return -0.5 * (nd * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

double cs_mvn_loglik(std::span<const double> x, double mean,
                     const CompoundSymmetryCov& cov) {
  if (x.size() != cov.n()) {
    raise(ErrorCode::DimensionMismatch,
          "cs_mvn_loglik: length " + std::to_string(x.size()) +
              " does not match covariance dimension " +
              std::to_string(cov.n()));
  }
  double sum = 0.0;
  for (double v : x) sum += v;
  const double xbar = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - xbar) * (v - xbar);
  return cs_mvn_loglik_stats(x.size(), xbar, ss, mean, cov);
}

}  // namespace baycv
