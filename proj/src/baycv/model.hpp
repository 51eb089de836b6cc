#pragma once

// Hierarchical model for paired cross-validation differences over several
// datasets:
//
//   x_i      ~ MVN(1 delta_i, Sigma_i)      Sigma_i compound symmetric (sigma_i^2, rho)
//   delta_i  ~ t(delta0, sigma0, nu)
//   sigma_i  ~ Uniform(0, sigma_bar_i)
//   delta0   ~ Uniform(-w, w)
//   sigma0   ~ Uniform(0, sigma_bar_0)
//   nu       ~ Gamma(shape, rate) truncated to nu >= nu_min
//
// fit() samples the joint posterior with adaptive Metropolis-within-Gibbs.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "baycv/harness.hpp"

namespace baycv {

struct ModelConfig {
  /// sigma_bar_i = factor * sd(x_i); sigma_bar_0 = factor * mean_i sd(x_i).
  double sigma_bar_factor = 1000.0;
  /// Lower bound on the half-width w of the delta0 prior. The effective w
  /// also covers the largest absolute (fitting-scale) difference.
  double delta0_prior_halfwidth = 1.0;
  double nu_shape = 2.0;
  double nu_rate = 0.1;
  double nu_min = 1.0;
  bool standardize = true;
  std::size_t chains = 4;
  std::size_t samples_per_chain = 12500;
  std::size_t warmup = 2000;
  std::uint64_t seed = 0;
  /// Threads used to run chains; results do not depend on it.
  std::size_t workers = 1;

  void validate() const;
};

struct Trace {
  std::string name;
  std::vector<std::vector<double>> chains;

  std::size_t draws_per_chain() const {
    return chains.empty() ? 0 : chains.front().size();
  }
  /// Chain-major concatenation.
  std::vector<double> flatten() const;
};

struct Diagnostic {
  std::string parameter;
  double r_hat = 0.0;
  double ess = 0.0;
  /// Set when R-hat is undefined (zero within-chain variance).
  bool undefined = false;
};

struct PosteriorChains {
  std::vector<std::string> datasets;
  /// delta0, sigma0, nu, then delta[<dataset>] and sigma[<dataset>].
  std::vector<Trace> traces;
  std::vector<Diagnostic> diagnostics;
  /// Draws are on the fitting scale; multiply by this to get raw score
  /// differences.
  double standardization_constant = 1.0;
  bool converged = true;
  std::vector<std::pair<std::string, std::string>> metadata;

  const Trace& trace(std::string_view name) const;
  std::size_t n_chains() const;
  std::size_t draws_per_chain() const;
  std::size_t n_draws() const { return n_chains() * draws_per_chain(); }
  std::string meta(std::string_view key) const;
  void set_meta(std::string key, std::string value);
};

inline constexpr double kRhatThreshold = 1.05;

/// Requires at least two datasets (TooFewDatasets otherwise; use
/// correlated_ttest for a single dataset). Non-convergence is reported via
/// PosteriorChains::converged, not thrown.
PosteriorChains fit(const std::vector<DifferenceSeries>& series,
                    const ModelConfig& config);

struct GenerateParams {
  double delta0 = 0.0;
  double sigma0 = 0.0;
  double nu = 5.0;
  std::size_t q = 2;
  std::size_t m = 1;
  std::size_t k = 10;
  double rho = 0.1;
  double sigma_min = 0.01;
  double sigma_max = 0.01;
  std::uint64_t seed = 0;
};

/// Draws synthetic difference series from the generative model. Datasets are
/// named ds01, ds02, ...
std::vector<DifferenceSeries> generate(const GenerateParams& params);

/// Posterior of the mean difference on a single dataset under the
/// correlation-corrected Bayesian t-test.
struct TTestPosterior {
  double location = 0.0;
  double scale = 0.0;
  double dof = 1.0;
  /// Zero sample variance: the posterior is a point mass at `location`.
  bool degenerate_variance = false;
};

TTestPosterior correlated_ttest(const DifferenceSeries& series);

/// Split-chain R-hat and effective sample size per parameter.
std::vector<Diagnostic> diagnostics(const PosteriorChains& chains);
Diagnostic diagnose(const Trace& trace);

/// CSV with header chain,draw,parameter,value.
void write_chains(std::ostream& out, const PosteriorChains& chains,
                  const std::string& manifest_ref = {});
/// key=value lines: metadata, then rhat.<param> and ess.<param>.
void write_chain_metadata(std::ostream& out, const PosteriorChains& chains);
void save_chains(const PosteriorChains& chains,
                 const std::filesystem::path& chains_csv,
                 const std::filesystem::path& metadata_file,
                 const std::string& manifest_ref = {});
PosteriorChains load_chains(const std::filesystem::path& chains_csv,
                            const std::filesystem::path& metadata_file);

}  // namespace baycv
