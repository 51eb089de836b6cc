#include "baycv/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "baycv/error.hpp"
#include "baycv/stat.hpp"

namespace baycv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTargetAcceptance = 0.44;
// Relative floor for per-dataset standard deviations.
constexpr double kSdFloor = 1e-6;
constexpr double kSigmaLowerFraction = 1e-3;

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct DatasetStats {
  std::size_t n = 0;
  double mean = 0.0;
  double sum_sq_dev = 0.0;
  double rho = 0.0;
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
  double init_sd = 0.0;
};

struct Problem {
  std::vector<DatasetStats> data;
  double delta0_bound = 1.0;
  double sigma0_lo = 0.0;
  double sigma0_hi = 0.0;
  double nu_shape = 2.0;
  double nu_rate = 0.1;
  double nu_min = 1.0;
  double init_delta_spread = 0.0;

  double loglik(std::size_t i, double delta, double sigma) const {
    const auto& d = data[i];
    const CompoundSymmetryCov cov(d.n, sigma * sigma, d.rho);
    return cs_mvn_loglik_stats(d.n, d.mean, d.sum_sq_dev, delta, cov);
  }

  double log_nu_prior(double nu) const {
    return (nu_shape - 1.0) * std::log(nu) - nu_rate * nu;
  }
};

// Sum over datasets of log t(delta_i | delta0, sigma0, nu).
double population_term(const std::vector<double>& delta, double delta0,
                       double sigma0, double nu) {
  const double q = static_cast<double>(delta.size());
  const double constant = std::lgamma(0.5 * (nu + 1.0)) -
                          std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * std::numbers::pi) -
                          std::log(sigma0);
  double kernel = 0.0;
  for (double d : delta) {
    const double z = (d - delta0) / sigma0;
    kernel += std::log1p(z * z / nu);
  }
  return q * constant - 0.5 * (nu + 1.0) * kernel;
}

double single_t_term(double delta, double delta0, double sigma0, double nu) {
  return t_log_pdf(delta, StudentT{delta0, sigma0, nu});
}

struct Adaptive {
  double log_step = 0.0;
  std::size_t proposals = 0;

  double step() const { return std::exp(log_step); }
  void update(bool accepted, bool adapting) {
    ++proposals;
    if (!adapting) return;
    const double gain = std::pow(static_cast<double>(proposals), -0.6);
    log_step += gain * ((accepted ? 1.0 : 0.0) - kTargetAcceptance);
    log_step = std::clamp(log_step, -40.0, 10.0);
  }
};

bool accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

struct ChainOutput {
  std::vector<double> delta0;
  std::vector<double> sigma0;
  std::vector<double> nu;
  std::vector<std::vector<double>> delta;
  std::vector<std::vector<double>> sigma;
};

class ChainSampler {
 public:
  ChainSampler(const Problem& problem, Rng rng)
      : p_(problem), q_(problem.data.size()), rng_(std::move(rng)) {
    initialize();
  }

  ChainOutput run(std::size_t warmup, std::size_t samples) {
    ChainOutput out;
    out.delta0.reserve(samples);
    out.sigma0.reserve(samples);
    out.nu.reserve(samples);
    out.delta.assign(q_, {});
    out.sigma.assign(q_, {});
    for (auto& v : out.delta) v.reserve(samples);
    for (auto& v : out.sigma) v.reserve(samples);

    for (std::size_t it = 0; it < warmup + samples; ++it) {
      sweep(it < warmup);
      if (it < warmup) continue;
      out.delta0.push_back(delta0_);
      out.sigma0.push_back(sigma0_);
      out.nu.push_back(nu_);
      for (std::size_t i = 0; i < q_; ++i) {
        out.delta[i].push_back(delta_[i]);
        out.sigma[i].push_back(sigma_[i]);
      }
    }
    return out;
  }

 private:
  void initialize() {
    delta_.resize(q_);
    sigma_.resize(q_);
    loglik_.resize(q_);
    delta_moves_.resize(q_);
    sigma_moves_.resize(q_);
    for (std::size_t i = 0; i < q_; ++i) {
      const auto& d = p_.data[i];
      delta_[i] = d.mean + 0.1 * d.init_sd * rng_.normal();
      sigma_[i] = std::clamp(d.init_sd * std::exp(0.2 * rng_.normal()),
                             d.sigma_lo * 1.01, d.sigma_hi * 0.99);
      loglik_[i] = p_.loglik(i, delta_[i], sigma_[i]);
      delta_moves_[i].log_step = std::log(0.5 * d.init_sd);
      sigma_moves_[i].log_step = std::log(0.3);
    }
    const double mean_delta =
        std::accumulate(delta_.begin(), delta_.end(), 0.0) /
        static_cast<double>(q_);
    const double spread = p_.init_delta_spread;
    delta0_ = std::clamp(mean_delta + 0.2 * spread * rng_.normal(),
                         -0.99 * p_.delta0_bound, 0.99 * p_.delta0_bound);
    sigma0_ = std::clamp(spread * std::exp(0.5 * rng_.normal()),
                         p_.sigma0_lo * 1.01, p_.sigma0_hi * 0.99);
    nu_ = p_.nu_min + std::exp(std::log(9.0) + 0.5 * rng_.normal());
    pop_ = population_term(delta_, delta0_, sigma0_, nu_);

    delta0_move_.log_step = std::log(0.5 * spread);
    sigma0_move_.log_step = std::log(0.5);
    nu_move_.log_step = std::log(0.5);
    shift_move_.log_step = std::log(0.5 * spread);
    scale_move_.log_step = std::log(0.3);
  }

  void sweep(bool adapting) {
    update_delta0(adapting);
    update_sigma0(adapting);
    update_nu(adapting);
    for (std::size_t i = 0; i < q_; ++i) {
      update_delta(i, adapting);
      update_sigma(i, adapting);
    }
    update_shift(adapting);
    update_scale(adapting);
  }

  void update_delta0(bool adapting) {
    const double proposal = delta0_ + delta0_move_.step() * rng_.normal();
    bool ok = false;
    if (std::fabs(proposal) < p_.delta0_bound) {
      const double pop = population_term(delta_, proposal, sigma0_, nu_);
      if (accept(pop - pop_, rng_)) {
        delta0_ = proposal;
        pop_ = pop;
        ok = true;
      }
    }
    delta0_move_.update(ok, adapting);
  }

  void update_sigma0(bool adapting) {
    const double u = sigma0_move_.step() * rng_.normal();
    const double proposal = sigma0_ * std::exp(u);
    bool ok = false;
    if (proposal > p_.sigma0_lo && proposal < p_.sigma0_hi) {
      const double pop = population_term(delta_, delta0_, proposal, nu_);
      if (accept(pop - pop_ + u, rng_)) {
        sigma0_ = proposal;
        pop_ = pop;
        ok = true;
      }
    }
    sigma0_move_.update(ok, adapting);
  }

  void update_nu(bool adapting) {
    const double eta = std::log(nu_ - p_.nu_min);
    const double eta_new = eta + nu_move_.step() * rng_.normal();
    const double proposal = p_.nu_min + std::exp(eta_new);
    bool ok = false;
    if (std::isfinite(proposal) && proposal > p_.nu_min) {
      const double pop = population_term(delta_, delta0_, sigma0_, proposal);
      const double log_ratio = pop - pop_ + p_.log_nu_prior(proposal) -
                               p_.log_nu_prior(nu_) + (eta_new - eta);
      if (accept(log_ratio, rng_)) {
        nu_ = proposal;
        pop_ = pop;
        ok = true;
      }
    }
    nu_move_.update(ok, adapting);
  }

  void update_delta(std::size_t i, bool adapting) {
    auto& move = delta_moves_[i];
    const double proposal = delta_[i] + move.step() * rng_.normal();
    const double ll = p_.loglik(i, proposal, sigma_[i]);
    const double t_new = single_t_term(proposal, delta0_, sigma0_, nu_);
    const double t_old = single_t_term(delta_[i], delta0_, sigma0_, nu_);
    const bool ok = accept(ll - loglik_[i] + t_new - t_old, rng_);
    if (ok) {
      delta_[i] = proposal;
      loglik_[i] = ll;
      pop_ += t_new - t_old;
    }
    move.update(ok, adapting);
  }

  void update_sigma(std::size_t i, bool adapting) {
    auto& move = sigma_moves_[i];
    const double u = move.step() * rng_.normal();
    const double proposal = sigma_[i] * std::exp(u);
    bool ok = false;
    const auto& d = p_.data[i];
    if (proposal > d.sigma_lo && proposal < d.sigma_hi) {
      const double ll = p_.loglik(i, delta_[i], proposal);
      if (accept(ll - loglik_[i] + u, rng_)) {
        sigma_[i] = proposal;
        loglik_[i] = ll;
        ok = true;
      }
    }
    move.update(ok, adapting);
  }

  // Translate delta0 and every delta_i together; the population term is
  // unchanged.
  void update_shift(bool adapting) {
    const double eps = shift_move_.step() * rng_.normal();
    bool ok = false;
    if (std::fabs(delta0_ + eps) < p_.delta0_bound) {
      double diff = 0.0;
      for (std::size_t i = 0; i < q_; ++i) {
        scratch_ll_[i] = p_.loglik(i, delta_[i] + eps, sigma_[i]);
        diff += scratch_ll_[i] - loglik_[i];
      }
      if (accept(diff, rng_)) {
        delta0_ += eps;
        for (std::size_t i = 0; i < q_; ++i) {
          delta_[i] += eps;
          loglik_[i] = scratch_ll_[i];
        }
        ok = true;
      }
    }
    shift_move_.update(ok, adapting);
  }

  // Rescale sigma0 and the deviations delta_i - delta0 by a common factor.
  void update_scale(bool adapting) {
    const double u = scale_move_.step() * rng_.normal();
    const double factor = std::exp(u);
    const double proposal = sigma0_ * factor;
    bool ok = false;
    if (proposal > p_.sigma0_lo && proposal < p_.sigma0_hi) {
      double diff = 0.0;
      for (std::size_t i = 0; i < q_; ++i) {
        scratch_delta_[i] = delta0_ + (delta_[i] - delta0_) * factor;
        scratch_ll_[i] = p_.loglik(i, scratch_delta_[i], sigma_[i]);
        diff += scratch_ll_[i] - loglik_[i];
      }
      const double pop =
          population_term(scratch_delta_, delta0_, proposal, nu_);
      const double log_ratio =
          diff + pop - pop_ + static_cast<double>(q_ + 1) * u;
      if (accept(log_ratio, rng_)) {
        sigma0_ = proposal;
        delta_ = scratch_delta_;
        loglik_ = scratch_ll_;
        pop_ = pop;
        ok = true;
      }
    }
    scale_move_.update(ok, adapting);
  }

  const Problem& p_;
  std::size_t q_;
  Rng rng_;

  double delta0_ = 0.0;
  double sigma0_ = 1.0;
  double nu_ = 10.0;
  std::vector<double> delta_;
  std::vector<double> sigma_;
  std::vector<double> loglik_;
  double pop_ = 0.0;

  std::vector<double> scratch_ll_ = std::vector<double>(q_);
  std::vector<double> scratch_delta_ = std::vector<double>(q_);

  Adaptive delta0_move_;
  Adaptive sigma0_move_;
  Adaptive nu_move_;
  Adaptive shift_move_;
  Adaptive scale_move_;
  std::vector<Adaptive> delta_moves_;
  std::vector<Adaptive> sigma_moves_;
};

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

void ModelConfig::validate() const {
  auto bad = [](const std::string& what) {
    raise(ErrorCode::InvalidArgument, "model config: " + what);
  };
  if (!(sigma_bar_factor > 0.0)) bad("sigma_bar_factor must be > 0");
  if (!(delta0_prior_halfwidth > 0.0)) bad("delta0_prior_halfwidth must be > 0");
  if (!(nu_shape > 0.0) || !(nu_rate > 0.0)) bad("nu prior needs shape, rate > 0");
  if (!(nu_min > 0.0)) bad("nu_min must be > 0");
  if (chains < 2) bad("at least 2 chains are required for diagnostics");
  if (samples_per_chain < 1000) bad("samples_per_chain must be >= 1000");
}

std::vector<double> Trace::flatten() const {
  std::vector<double> out;
  out.reserve(chains.size() * draws_per_chain());
  for (const auto& c : chains) out.insert(out.end(), c.begin(), c.end());
  return out;
}

const Trace& PosteriorChains::trace(std::string_view name) const {
  for (const auto& t : traces) {
    if (t.name == name) return t;
  }
  raise(ErrorCode::InvalidArgument,
        "no parameter named '" + std::string(name) + "'");
}

std::size_t PosteriorChains::n_chains() const {
  return traces.empty() ? 0 : traces.front().chains.size();
}

std::size_t PosteriorChains::draws_per_chain() const {
  return traces.empty() ? 0 : traces.front().draws_per_chain();
}

std::string PosteriorChains::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return {};
}

void PosteriorChains::set_meta(std::string key, std::string value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  metadata.emplace_back(std::move(key), std::move(value));
}

PosteriorChains fit(const std::vector<DifferenceSeries>& series,
                    const ModelConfig& config) {
  if (series.size() < 2) {
    raise(ErrorCode::TooFewDatasets,
          "the hierarchical model needs at least 2 datasets, got " +
              std::to_string(series.size()) +
              "; use the correlated Bayesian t-test for a single dataset");
  }
  config.validate();
  for (const auto& s : series) {
    if (s.n() < 2) {
      raise(ErrorCode::InvalidArgument,
            "dataset '" + s.dataset_id + "' has fewer than 2 differences");
    }
    if (!cs_rho_admissible(s.n(), s.rho)) {
      raise(ErrorCode::InvalidArgument,
            "inadmissible rho for dataset '" + s.dataset_id + "'");
    }
  }

  double pooled_raw = 0.0;
  for (const auto& s : series) pooled_raw += s.stddev();
  pooled_raw /= static_cast<double>(series.size());
  const double constant =
      (config.standardize && pooled_raw > 0.0) ? pooled_raw : 1.0;

  Problem problem;
  problem.nu_shape = config.nu_shape;
  problem.nu_rate = config.nu_rate;
  problem.nu_min = config.nu_min;
  const double pooled_fit = pooled_raw / constant;
  const double floor = kSdFloor * (pooled_fit > 0.0 ? pooled_fit : 1.0);
  const double sigma_lo = kSigmaLowerFraction * floor;

  double max_abs = 0.0;
  double mean_eff_sd = 0.0;
  std::vector<double> means;
  for (const auto& s : series) {
    DatasetStats d;
    d.n = s.n();
    d.rho = s.rho;
    std::vector<double> y(s.x.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
      y[j] = s.x[j] / constant;
      max_abs = std::max(max_abs, std::fabs(y[j]));
    }
    d.mean = std::accumulate(y.begin(), y.end(), 0.0) /
             static_cast<double>(y.size());
    for (double v : y) d.sum_sq_dev += (v - d.mean) * (v - d.mean);
    const double sd = std::max(sample_sd(y), floor);
    d.init_sd = sd;
    d.sigma_lo = sigma_lo;
    d.sigma_hi = config.sigma_bar_factor * sd;
    mean_eff_sd += sd;
    means.push_back(d.mean);
    problem.data.push_back(d);
  }
  mean_eff_sd /= static_cast<double>(series.size());
  problem.delta0_bound = std::max(config.delta0_prior_halfwidth, max_abs);
  problem.sigma0_lo = sigma_lo;
  problem.sigma0_hi = config.sigma_bar_factor * mean_eff_sd;
  problem.init_delta_spread = std::max(sample_sd(means), floor);

  std::vector<ChainOutput> outputs(config.chains);
  std::vector<std::exception_ptr> errors(config.chains);
  auto run_chain = [&](std::size_t c) {
    try {
      ChainSampler sampler(problem, rng_fork(config.seed, c + 1));
      outputs[c] = sampler.run(config.warmup, config.samples_per_chain);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(config.workers, 1, config.chains);
  if (workers == 1) {
    for (std::size_t c = 0; c < config.chains; ++c) run_chain(c);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        for (std::size_t c = w; c < config.chains; c += workers) run_chain(c);
      });
    }
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  PosteriorChains post;
  post.standardization_constant = constant;
  for (const auto& s : series) post.datasets.push_back(s.dataset_id);
  auto collect = [&](std::string name, auto member) {
    Trace t{std::move(name), {}};
    for (auto& out : outputs) t.chains.push_back(std::move(member(out)));
    post.traces.push_back(std::move(t));
  };
  collect("delta0", [](ChainOutput& o) -> auto& { return o.delta0; });
  collect("sigma0", [](ChainOutput& o) -> auto& { return o.sigma0; });
  collect("nu", [](ChainOutput& o) -> auto& { return o.nu; });
  for (std::size_t i = 0; i < series.size(); ++i) {
    collect("delta[" + series[i].dataset_id + "]",
            [i](ChainOutput& o) -> auto& { return o.delta[i]; });
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    collect("sigma[" + series[i].dataset_id + "]",
            [i](ChainOutput& o) -> auto& { return o.sigma[i]; });
  }

  post.diagnostics = diagnostics(post);
  post.converged = std::none_of(
      post.diagnostics.begin(), post.diagnostics.end(),
      [](const Diagnostic& d) { return !d.undefined && d.r_hat > kRhatThreshold; });

  post.set_meta("model", "hierarchical-cs-mvn-t");
  post.set_meta("prior.delta0", "uniform(-" + fmt(problem.delta0_bound) +
                                    "," + fmt(problem.delta0_bound) + ")");
  post.set_meta("prior.sigma0", "uniform(0," + fmt(problem.sigma0_hi) + ")");
  post.set_meta("prior.sigma_i", "uniform(0," + fmt(config.sigma_bar_factor) +
                                     "*sd_i)");
  post.set_meta("prior.nu", "gamma(shape=" + fmt(config.nu_shape) +
                                ",rate=" + fmt(config.nu_rate) +
                                ") truncated nu>=" + fmt(config.nu_min));
  post.set_meta("sigma_bar_factor", fmt(config.sigma_bar_factor));
  post.set_meta("delta0_prior_halfwidth", fmt(config.delta0_prior_halfwidth));
  post.set_meta("delta0_prior_halfwidth_effective", fmt(problem.delta0_bound));
  post.set_meta("sd_floor", fmt(floor));
  post.set_meta("standardize", config.standardize ? "true" : "false");
  post.set_meta("standardization_constant", fmt(constant));
  post.set_meta("chains", std::to_string(config.chains));
  post.set_meta("samples_per_chain", std::to_string(config.samples_per_chain));
  post.set_meta("warmup", std::to_string(config.warmup));
  post.set_meta("seed", std::to_string(config.seed));
  std::string rhos;
  for (const auto& s : series) {
    if (!rhos.empty()) rhos += ';';
    rhos += s.dataset_id + ":" + fmt(s.rho);
  }
  post.set_meta("rho", rhos);
  post.set_meta("converged", post.converged ? "true" : "false");
  return post;
}

std::vector<DifferenceSeries> generate(const GenerateParams& params) {
  if (params.q < 1 || params.m < 1 || params.k < 1) {
    raise(ErrorCode::InvalidArgument, "generate: q, m and k must be >= 1");
  }
  if (!(params.sigma0 >= 0.0) || !(params.nu > 0.0)) {
    raise(ErrorCode::InvalidArgument, "generate: need sigma0 >= 0, nu > 0");
  }
  if (!(params.sigma_min > 0.0) || params.sigma_max < params.sigma_min) {
    raise(ErrorCode::InvalidArgument,
          "generate: need 0 < sigma_min <= sigma_max");
  }
  const std::size_t n = params.m * params.k;
  if (!cs_rho_admissible(n, params.rho)) {
    raise(ErrorCode::InvalidArgument, "generate: inadmissible rho");
  }
  auto rng = rng_fork(params.seed, 0);
  const StudentT population(params.delta0, params.sigma0, params.nu);
  const double nd = static_cast<double>(n);
  const double residual_scale = std::sqrt(1.0 - params.rho);
  const double mean_scale = std::sqrt(1.0 + (nd - 1.0) * params.rho);

  std::vector<DifferenceSeries> out;
  for (std::size_t i = 0; i < params.q; ++i) {
    const double delta_i = t_sample(population, rng);
    const double sigma_i =
        params.sigma_min + (params.sigma_max - params.sigma_min) * rng.uniform();
    std::vector<double> z(n);
    for (auto& v : z) v = rng.normal();
    const double zbar = std::accumulate(z.begin(), z.end(), 0.0) / nd;
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = delta_i + sigma_i * (residual_scale * (z[j] - zbar) +
                                  mean_scale * zbar);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "ds%02zu", i + 1);
    out.emplace_back(name, std::move(x), params.rho, params.m, params.k);
  }
  return out;
}

TTestPosterior correlated_ttest(const DifferenceSeries& series) {
  const std::size_t n = series.n();
  if (n < 2) {
    raise(ErrorCode::InvalidArgument,
          "correlated t-test needs at least 2 differences");
  }
  if (!(series.rho >= 0.0 && series.rho < 1.0)) {
    raise(ErrorCode::InvalidArgument,
          "correlated t-test needs 0 <= rho < 1");
  }
  TTestPosterior post;
  post.location = series.mean();
  const double s = series.stddev();
  const double nd = static_cast<double>(n);
  post.scale = std::sqrt((1.0 / nd + series.rho / (1.0 - series.rho)) * s * s);
  post.dof = nd - 1.0;
  post.degenerate_variance = s == 0.0;
  return post;
}

void write_chains(std::ostream& out, const PosteriorChains& chains,
                  const std::string& manifest_ref) {
  if (!manifest_ref.empty()) out << "# manifest: " << manifest_ref << '\n';
  out << "chain,draw,parameter,value\n";
  for (std::size_t c = 0; c < chains.n_chains(); ++c) {
    for (std::size_t d = 0; d < chains.draws_per_chain(); ++d) {
      for (const auto& t : chains.traces) {
        out << c << ',' << d << ',' << t.name << ',' << fmt(t.chains[c][d])
            << '\n';
      }
    }
  }
}

void write_chain_metadata(std::ostream& out, const PosteriorChains& chains) {
  for (const auto& [k, v] : chains.metadata) out << k << '=' << v << '\n';
  std::string names;
  for (const auto& d : chains.datasets) {
    if (!names.empty()) names += ';';
    names += d;
  }
  out << "datasets=" << names << '\n';
  for (const auto& d : chains.diagnostics) {
    out << "rhat." << d.parameter << '=' << fmt(d.r_hat) << '\n';
    out << "ess." << d.parameter << '=' << fmt(d.ess) << '\n';
  }
}

void save_chains(const PosteriorChains& chains,
                 const std::filesystem::path& chains_csv,
                 const std::filesystem::path& metadata_file,
                 const std::string& manifest_ref) {
  std::ofstream csv(chains_csv);
  if (!csv) raise(ErrorCode::Io, "cannot write " + chains_csv.string());
  write_chains(csv, chains, manifest_ref);
  std::ofstream meta(metadata_file);
  if (!meta) raise(ErrorCode::Io, "cannot write " + metadata_file.string());
  if (!manifest_ref.empty()) meta << "# manifest: " << manifest_ref << '\n';
  write_chain_metadata(meta, chains);
  if (!csv || !meta) raise(ErrorCode::Io, "failed writing posterior chains");
}

PosteriorChains load_chains(const std::filesystem::path& chains_csv,
                            const std::filesystem::path& metadata_file) {
  std::ifstream meta(metadata_file);
  if (!meta) raise(ErrorCode::Io, "cannot open " + metadata_file.string());
  PosteriorChains post;
  std::string line;
  while (std::getline(meta, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::Parse, metadata_file.string() + ": expected key=value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "datasets") {
      std::istringstream names(value);
      std::string name;
      while (std::getline(names, name, ';')) post.datasets.push_back(name);
    } else if (!key.starts_with("rhat.") && !key.starts_with("ess.")) {
      post.set_meta(std::move(key), std::move(value));
    }
  }
  const std::string constant = post.meta("standardization_constant");
  if (constant.empty()) {
    raise(ErrorCode::Parse,
          metadata_file.string() + ": missing standardization_constant");
  }
  try {
    post.standardization_constant = std::stod(constant);
  } catch (const std::exception&) {
    raise(ErrorCode::Parse, metadata_file.string() +
                                ": bad standardization_constant");
  }

  std::ifstream csv(chains_csv);
  if (!csv) raise(ErrorCode::Io, "cannot open " + chains_csv.string());
  std::map<std::string, std::size_t> index;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line != "chain,draw,parameter,value") {
        raise(ErrorCode::Parse, chains_csv.string() + ": bad header");
      }
      have_header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const auto c3 = line.rfind(',');
    if (c1 == std::string::npos || c2 == std::string::npos || c3 <= c2) {
      raise(ErrorCode::Parse,
            chains_csv.string() + ":" + std::to_string(line_no) +
                ": malformed row");
    }
    std::size_t chain = 0;
    std::size_t draw = 0;
    double value = 0.0;
    const char* b = line.data();
    const bool ok =
        std::from_chars(b, b + c1, chain).ec == std::errc() &&
        std::from_chars(b + c1 + 1, b + c2, draw).ec == std::errc() &&
        std::from_chars(b + c3 + 1, b + line.size(), value).ec == std::errc();
    if (!ok) {
      raise(ErrorCode::Parse,
            chains_csv.string() + ":" + std::to_string(line_no) +
                ": malformed number");
    }
    const std::string name = line.substr(c2 + 1, c3 - c2 - 1);
    auto [it, inserted] = index.emplace(name, post.traces.size());
    if (inserted) post.traces.push_back(Trace{name, {}});
    auto& trace = post.traces[it->second];
    if (chain >= trace.chains.size()) trace.chains.resize(chain + 1);
    if (draw != trace.chains[chain].size()) {
      raise(ErrorCode::Parse, chains_csv.string() + ":" +
                                  std::to_string(line_no) +
                                  ": draws out of order");
    }
    trace.chains[chain].push_back(value);
  }
  for (const char* required : {"delta0", "sigma0", "nu"}) {
    if (!index.contains(required)) {
      raise(ErrorCode::Parse, chains_csv.string() + ": missing parameter " +
                                  required);
    }
  }
  const std::size_t draws = post.traces.front().draws_per_chain();
  for (const auto& t : post.traces) {
    if (t.chains.size() != post.traces.front().chains.size()) {
      raise(ErrorCode::Parse, chains_csv.string() + ": ragged chains");
    }
    for (const auto& c : t.chains) {
      if (c.size() != draws) {
        raise(ErrorCode::Parse, chains_csv.string() + ": ragged chains");
      }
    }
  }
  post.diagnostics = diagnostics(post);
  post.converged = std::none_of(
      post.diagnostics.begin(), post.diagnostics.end(),
      [](const Diagnostic& d) { return !d.undefined && d.r_hat > kRhatThreshold; });
  return post;
}

}  // namespace baycv
