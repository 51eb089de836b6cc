#pragma once

// Region-of-practical-equivalence decisions. Differences are system A minus
// system B, so "left" (delta < -r) favours B and "right" (delta > r)
// favours A.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "baycv/harness.hpp"
#include "baycv/model.hpp"

namespace baycv {

struct RopeInterval {
  double halfwidth = 0.0;

  RopeInterval() = default;
  explicit RopeInterval(double r);
};

enum class Verdict { Left, Rope, Right };

const char* to_string(Verdict v);
Verdict parse_verdict(const std::string& text);

struct RegionProbs {
  double left = 0.0;
  double rope = 0.0;
  double right = 0.0;

  /// Ties resolve rope > left > right.
  Verdict argmax() const;
};

struct DecisionTriple {
  std::size_t n_left = 0;
  std::size_t n_rope = 0;
  std::size_t n_right = 0;
  std::size_t n_samples = 0;
  double p_left = 0.0;
  double p_rope = 0.0;
  double p_right = 0.0;
  Verdict verdict = Verdict::Rope;
};

/// Mass of t(delta0, sigma0, nu) below -r, inside [-r, r] and above r.
/// sigma0 = 0 is the point mass at delta0.
RegionProbs region_probs(double delta0, double sigma0, double nu,
                         const RopeInterval& rope);

/// Counts, per posterior draw of (delta0, sigma0, nu), the region with the
/// highest predictive mass. The rope is given on the raw difference scale
/// and divided by the chains' standardization constant.
DecisionTriple tally(const PosteriorChains& chains, const RopeInterval& rope);

/// Builds a triple from raw counters; verdict is the argmax with the same
/// tie rule.
DecisionTriple make_triple(std::size_t n_left, std::size_t n_rope,
                           std::size_t n_right);

/// Region masses of a single-dataset t-test posterior.
RegionProbs decide(const TTestPosterior& posterior, const RopeInterval& rope);

struct SimplexPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Barycentric projection with left at (0,0), rope at (0.5, sqrt(3)/2) and
/// right at (1,0).
SimplexPoint simplex_coordinates(double p_left, double p_rope, double p_right);
SimplexPoint simplex_coordinates(const DecisionTriple& triple);

/// Half the width of the pooled empirical 95% interval of all differences.
double rope_from_ci95(const std::vector<DifferenceSeries>& series);

struct PairVerdict {
  std::string system_a;
  std::string system_b;
  Verdict verdict = Verdict::Rope;
};

struct Ranking {
  /// Each pair rendered as "A < B", "A > B" or "A ≈ B".
  std::vector<std::string> edges;
  bool consistent = false;
  /// e.g. "TnT < Collins ≈ LAPOS"; empty when inconsistent.
  std::string chain;
  std::vector<std::string> inconsistencies;
};

/// Partial order from pairwise verdicts. Every unordered pair of `systems`
/// must appear exactly once (either orientation) or MissingPair is thrown.
Ranking rank(const std::vector<std::string>& systems,
             const std::vector<PairVerdict>& pairs);

/// CSV row schema of the pairwise report.
inline constexpr const char* kReportHeader =
    "system_a,system_b,metric,p_left,p_rope,p_right,verdict,n_samples,"
    "rope_halfwidth";

struct ReportRow {
  std::string system_a;
  std::string system_b;
  std::string metric;
  DecisionTriple triple;
  double rope_halfwidth = 0.0;
};

std::string format_report_row(const ReportRow& row);

}  // namespace baycv
