// Split-chain potential scale reduction and effective sample size, following
// the multi-chain formulation with Geyer's initial monotone sequence.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "baycv/error.hpp"
#include "baycv/model.hpp"

namespace baycv {

namespace {

struct SplitChains {
  std::vector<std::vector<double>> parts;
  std::size_t length = 0;
};

SplitChains split(const Trace& trace) {
  SplitChains out;
  const std::size_t len = trace.draws_per_chain();
  out.length = len / 2;
  for (const auto& c : trace.chains) {
    if (c.size() != len) {
      raise(ErrorCode::InvalidArgument,
            "chains of parameter " + trace.name + " have unequal lengths");
    }
    out.parts.emplace_back(c.begin(), c.begin() + out.length);
    out.parts.emplace_back(c.end() - out.length, c.end());
  }
  return out;
}

double autocovariance(const std::vector<double>& x, double mean,
                      std::size_t lag) {
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) {
    acc += (x[i] - mean) * (x[i + lag] - mean);
  }
  return acc / static_cast<double>(n);
}

}  // namespace

Diagnostic diagnose(const Trace& trace) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  Diagnostic d;
  d.parameter = trace.name;
  const auto sc = split(trace);
  const std::size_t n = sc.length;
  const std::size_t m = sc.parts.size();
  if (n < 4 || m < 2) {
    d.r_hat = kNaN;
    d.ess = kNaN;
    d.undefined = true;
    return d;
  }
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);

  std::vector<double> means(m);
  std::vector<double> vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& p = sc.parts[j];
    means[j] = std::accumulate(p.begin(), p.end(), 0.0) / nd;
    double ss = 0.0;
    for (double v : p) ss += (v - means[j]) * (v - means[j]);
    vars[j] = ss / (nd - 1.0);
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / md;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / md;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b = b * nd / (md - 1.0);
  const double var_plus = (nd - 1.0) / nd * w + b / nd;

  if (!(w > 0.0)) {
    d.undefined = b == 0.0;
    d.r_hat = d.undefined ? kNaN : std::numeric_limits<double>::infinity();
    d.ess = d.undefined ? kNaN : 1.0;
    return d;
  }
  d.r_hat = std::sqrt(var_plus / w);

  auto mean_acov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      acc += autocovariance(sc.parts[j], means[j], lag);
    }
    return acc / md;
  };
  auto rho_hat = [&](std::size_t lag) {
    return 1.0 - (w - mean_acov(lag)) / var_plus;
  };

  std::vector<double> rho;
  rho.push_back(1.0);
  double rho_odd = rho_hat(1);
  rho.push_back(rho_odd);
  std::size_t t = 1;
  double rho_even = 1.0;
  while (t + 2 < n - 1) {
    rho_even = rho_hat(t + 1);
    rho_odd = rho_hat(t + 2);
    if (rho_even + rho_odd < 0.0) break;
    rho.push_back(rho_even);
    rho.push_back(rho_odd);
    t += 2;
  }
  // Enforce monotone decrease of the paired sums.
  for (std::size_t i = 3; i < rho.size(); i += 2) {
    const double prev = rho[i - 3] + rho[i - 2];
    if (rho[i - 1] + rho[i] > prev) {
      rho[i - 1] = prev / 2.0;
      rho[i] = prev / 2.0;
    }
  }
  double tau = -1.0 + 2.0 * std::accumulate(rho.begin(), rho.end(), 0.0);
  if (rho_even > 0.0) tau += rho_even;
  const double total = md * nd;
  tau = std::max(tau, 1.0 / std::log10(total));
  d.ess = total / tau;
  return d;
}

std::vector<Diagnostic> diagnostics(const PosteriorChains& chains) {
  std::vector<Diagnostic> out;
  out.reserve(chains.traces.size());
  for (const auto& t : chains.traces) out.push_back(diagnose(t));
  return out;
}

}  // namespace baycv
