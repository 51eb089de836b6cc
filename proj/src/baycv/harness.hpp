#pragma once

// Repeated k-fold experiment plumbing: split plans, the score matrix and its
// CSV interchange format, external tagger invocation, and pairing of scores
// into per-dataset difference series.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "baycv/metrics.hpp"

namespace baycv {

namespace metric_id {
inline constexpr const char* kToken = "token";
inline constexpr const char* kSentence = "sentence";
inline constexpr const char* kOov = "oov";
}  // namespace metric_id

/// m repetitions of a k-fold partition of n_items sentences.
struct SplitPlan {
  std::size_t n_items = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  /// assignments[repetition][item] is the fold index of that item.
  std::vector<std::vector<std::uint32_t>> assignments;

  bool operator==(const SplitPlan&) const = default;
};

/// Each repetition is an independent seeded shuffle dealt round-robin into
/// k folds, so fold sizes differ by at most one.
SplitPlan make_splits(std::size_t n_items, std::size_t k, std::size_t m,
                      std::uint64_t seed);

struct FoldRoles {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> eval;
};

/// Evaluation on `eval_fold`, validation on its cyclic successor, training on
/// the rest. Item indices are ascending within each role.
FoldRoles fold_roles(const SplitPlan& plan, std::size_t repetition,
                     std::size_t eval_fold);

void write_plan(std::ostream& out, const SplitPlan& plan,
                const std::string& manifest_ref = {});
SplitPlan read_plan(std::istream& in);
SplitPlan load_plan(const std::filesystem::path& path);

struct ScoreKey {
  std::string dataset;
  std::string system;
  std::string metric;
  std::size_t repetition = 0;
  std::size_t fold = 0;

  auto operator<=>(const ScoreKey&) const = default;
};

/// Evaluation scores keyed by (dataset, system, metric, repetition, fold).
/// A missing score (e.g. a fold without OOV tokens) is std::nullopt.
class ScoreMatrix {
 public:
  using Score = std::optional<double>;

  /// Throws ScoreMismatch on a duplicate key, InvalidArgument on a score
  /// outside [0, 1].
  void add(ScoreKey key, Score score);
  void merge(const ScoreMatrix& other);

  const std::map<ScoreKey, Score>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Systems in first-seen order of insertion.
  const std::vector<std::string>& systems() const { return systems_; }
  std::vector<std::string> datasets() const;
  std::size_t count(const std::string& system, const std::string& metric,
                    bool include_missing = true) const;

 private:
  std::map<ScoreKey, Score> entries_;
  std::vector<std::string> systems_;
};

/// CSV with header dataset,system,metric,repetition,fold,score. Lines
/// starting with '#' are comments.
ScoreMatrix read_scores(std::istream& in, const std::string& source = "<stream>");
ScoreMatrix load_scores(const std::filesystem::path& path);
void write_scores(std::ostream& out, const ScoreMatrix& scores,
                  const std::string& manifest_ref = {});

struct RhoPolicy {
  enum class Kind { InverseK, Fixed };
  Kind kind = Kind::InverseK;
  double value = 0.0;

  static RhoPolicy inverse_k() { return {}; }
  static RhoPolicy fixed(double rho) { return {Kind::Fixed, rho}; }
  double resolve(std::size_t k) const;
  std::string describe() const;
};

/// Paired differences (system A minus system B) on one dataset, ordered by
/// (repetition, fold).
struct DifferenceSeries {
  std::string dataset_id;
  std::vector<double> x;
  double rho = 0.0;
  std::size_t m = 0;
  std::size_t k = 0;

  DifferenceSeries() = default;
  DifferenceSeries(std::string dataset_id, std::vector<double> x, double rho,
                   std::size_t m, std::size_t k);

  std::size_t n() const { return x.size(); }
  double mean() const;
  /// Sample standard deviation (n - 1 denominator); 0 when n < 2.
  double stddev() const;
};

/// One series per dataset on which both systems have the metric. Entries
/// missing in either system are dropped pairwise.
std::vector<DifferenceSeries> assemble_differences(const ScoreMatrix& scores,
                                                   const std::string& system_a,
                                                   const std::string& system_b,
                                                   const std::string& metric,
                                                   RhoPolicy rho_policy = {});

struct ExternalRunOptions {
  std::string dataset_id;
  std::string system_id;
  /// Shell command with {train}, {validation}, {eval} and {output}
  /// placeholders. {eval} carries gold tags; the command writes predicted
  /// tags for the same tokens to {output}.
  std::string command;
  std::size_t workers = 1;
  /// Scratch directory; a fresh temporary directory when empty.
  std::filesystem::path work_dir;
  /// OOV vocabulary from the training portion only, or training plus
  /// validation.
  bool vocab_includes_validation = false;
  bool keep_files = false;
};

/// Runs the command once per (repetition, fold) and scores its predictions
/// with token, sentence and OOV accuracy.
ScoreMatrix run_external(const SplitPlan& plan, const TaggedCorpus& gold,
                         const ExternalRunOptions& options);

}  // namespace baycv
