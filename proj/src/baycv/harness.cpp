#include "baycv/harness.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "baycv/error.hpp"
#include "baycv/stat.hpp"

namespace baycv {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

std::string substitute(std::string text, const std::string& placeholder,
                       const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
  return text;
}

std::string read_file_head(const fs::path& path, std::size_t limit) {
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (text.size() > limit) text = text.substr(text.size() - limit);
  return text;
}

std::vector<Sentence> select(const TaggedCorpus& corpus,
                             const std::vector<std::size_t>& items) {
  std::vector<Sentence> out;
  out.reserve(items.size());
  for (auto i : items) out.push_back(corpus.sentences()[i]);
  return out;
}

void write_sentences_file(const fs::path& path,
                          const std::vector<Sentence>& sentences) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::Io, "cannot write " + path.string());
  write_sentences(out, sentences);
}

fs::path make_temp_dir() {
  std::string pattern = (fs::temp_directory_path() / "baycv-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) {
    raise(ErrorCode::Io, "cannot create a temporary directory");
  }
  return pattern;
}

struct FoldTask {
  std::size_t repetition;
  std::size_t fold;
};

struct FoldScores {
  double token = 0.0;
  double sentence = 0.0;
  std::optional<double> oov;
};

FoldScores run_fold(const SplitPlan& plan, const TaggedCorpus& gold,
                    const ExternalRunOptions& options, const fs::path& root,
                    const FoldTask& task) {
  const auto roles = fold_roles(plan, task.repetition, task.fold);
  const fs::path dir = root / ("rep" + std::to_string(task.repetition) +
                               "_fold" + std::to_string(task.fold));
  fs::create_directories(dir);
  const auto train_path = dir / "train.tsv";
  const auto validation_path = dir / "validation.tsv";
  const auto eval_path = dir / "eval.tsv";
  const auto output_path = dir / "pred.tsv";
  const auto log_path = dir / "command.log";

  const auto train = select(gold, roles.train);
  const auto validation = select(gold, roles.validation);
  const auto eval = select(gold, roles.eval);
  write_sentences_file(train_path, train);
  write_sentences_file(validation_path, validation);
  write_sentences_file(eval_path, eval);

  std::string command = options.command;
  command = substitute(command, "{train}", shell_quote(train_path.string()));
  command = substitute(command, "{validation}",
                       shell_quote(validation_path.string()));
  command = substitute(command, "{eval}", shell_quote(eval_path.string()));
  command = substitute(command, "{output}", shell_quote(output_path.string()));
  const std::string wrapped =
      "( " + command + "\n) > " + shell_quote(log_path.string()) + " 2>&1";

  const int status = std::system(wrapped.c_str());
  const std::string where = "repetition " + std::to_string(task.repetition) +
                            ", fold " + std::to_string(task.fold);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status)
                                                         : -1;
    raise(ErrorCode::CommandFailed,
          "command failed (exit " + std::to_string(code) + ") at " + where +
              ":\n" + read_file_head(log_path, 2048));
  }

  FoldScores scores;
  try {
    const TaggedCorpus eval_gold(eval);
    const TaggedCorpus pred = load_corpus(output_path);
    Vocabulary vocab;
    for (const auto& s : train)
      for (const auto& tt : s) vocab.insert(tt.token);
    if (options.vocab_includes_validation) {
      for (const auto& s : validation)
        for (const auto& tt : s) vocab.insert(tt.token);
    }
    scores.token = token_accuracy(eval_gold, pred);
    scores.sentence = sentence_accuracy(eval_gold, pred);
    try {
      scores.oov = oov_accuracy(vocab, eval_gold, pred);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoOovTokens) throw;
    }
  } catch (const Error& e) {
    raise(ErrorCode::OutputUnreadable,
          "unusable predictions at " + where + ": " + e.what());
  }
  if (!options.keep_files) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  return scores;
}

}  // namespace

SplitPlan make_splits(std::size_t n_items, std::size_t k, std::size_t m,
                      std::uint64_t seed) {
  if (k < 2) raise(ErrorCode::InvalidArgument, "k must be at least 2");
  if (m < 1) raise(ErrorCode::InvalidArgument, "m must be at least 1");
  if (n_items < k) {
    raise(ErrorCode::TooFewItems, "n_items=" + std::to_string(n_items) +
                                      " is smaller than k=" +
                                      std::to_string(k));
  }
  SplitPlan plan{n_items, k, m, seed, {}};
  plan.assignments.reserve(m);
  std::vector<std::size_t> perm(n_items);
  for (std::size_t r = 0; r < m; ++r) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = rng_fork(seed, r);
    for (std::size_t i = n_items - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i + 1));
      std::swap(perm[i], perm[j]);
    }
    std::vector<std::uint32_t> folds(n_items);
    for (std::size_t pos = 0; pos < n_items; ++pos) {
      folds[perm[pos]] = static_cast<std::uint32_t>(pos % k);
    }
    plan.assignments.push_back(std::move(folds));
  }
  return plan;
}

FoldRoles fold_roles(const SplitPlan& plan, std::size_t repetition,
                     std::size_t eval_fold) {
  if (repetition >= plan.m || repetition >= plan.assignments.size()) {
    raise(ErrorCode::IndexOutOfRange,
          "repetition " + std::to_string(repetition) + " out of range");
  }
  if (eval_fold >= plan.k) {
    raise(ErrorCode::IndexOutOfRange,
          "fold " + std::to_string(eval_fold) + " out of range");
  }
  const std::size_t validation_fold = (eval_fold + 1) % plan.k;
  FoldRoles roles;
  const auto& folds = plan.assignments[repetition];
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if (folds[i] == eval_fold) {
      roles.eval.push_back(i);
    } else if (folds[i] == validation_fold) {
      roles.validation.push_back(i);
    } else {
      roles.train.push_back(i);
    }
  }
  return roles;
}

void write_plan(std::ostream& out, const SplitPlan& plan,
                const std::string& manifest_ref) {
  if (!manifest_ref.empty()) out << "# manifest: " << manifest_ref << '\n';
  out << "baycv-split-plan 1\n";
  out << "n_items " << plan.n_items << '\n';
  out << "k " << plan.k << '\n';
  out << "m " << plan.m << '\n';
  out << "seed " << plan.seed << '\n';
  for (std::size_t r = 0; r < plan.assignments.size(); ++r) {
    out << "rep " << r;
    for (auto f : plan.assignments[r]) out << ' ' << f;
    out << '\n';
  }
}

SplitPlan read_plan(std::istream& in) {
  SplitPlan plan;
  std::string line;
  bool saw_magic = false;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    raise(ErrorCode::Parse,
          "split plan line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (!saw_magic) {
      int version = 0;
      if (key != "baycv-split-plan" || !(fields >> version) || version != 1) {
        fail("not a split plan file");
      }
      saw_magic = true;
      continue;
    }
    if (key == "n_items") {
      fields >> plan.n_items;
    } else if (key == "k") {
      fields >> plan.k;
    } else if (key == "m") {
      fields >> plan.m;
    } else if (key == "seed") {
      fields >> plan.seed;
    } else if (key == "rep") {
      std::size_t r = 0;
      fields >> r;
      if (r != plan.assignments.size()) fail("repetitions out of order");
      std::vector<std::uint32_t> folds;
      folds.reserve(plan.n_items);
      std::uint32_t f = 0;
      while (fields >> f) {
        if (f >= plan.k) fail("fold index out of range");
        folds.push_back(f);
      }
      if (folds.size() != plan.n_items) fail("wrong number of assignments");
      plan.assignments.push_back(std::move(folds));
      continue;
    } else {
      fail("unknown key '" + key + "'");
    }
    if (fields.fail()) fail("malformed value for '" + key + "'");
  }
  if (!saw_magic) raise(ErrorCode::Parse, "empty split plan");
  if (plan.k < 2 || plan.m < 1 || plan.assignments.size() != plan.m) {
    raise(ErrorCode::Parse, "split plan is incomplete");
  }
  return plan;
}

SplitPlan load_plan(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open split plan " + path.string());
  return read_plan(in);
}

void ScoreMatrix::add(ScoreKey key, Score score) {
  if (score && !(*score >= 0.0 && *score <= 1.0)) {
    raise(ErrorCode::InvalidArgument,
          "score " + format_double(*score) + " outside [0, 1]");
  }
  if (std::find(systems_.begin(), systems_.end(), key.system) ==
      systems_.end()) {
    systems_.push_back(key.system);
  }
  auto [it, inserted] = entries_.emplace(std::move(key), score);
  if (!inserted) {
    const auto& k = it->first;
    raise(ErrorCode::ScoreMismatch,
          "duplicate score key (" + k.dataset + ", " + k.system + ", " +
              k.metric + ", " + std::to_string(k.repetition) + ", " +
              std::to_string(k.fold) + ")");
  }
}

void ScoreMatrix::merge(const ScoreMatrix& other) {
  for (const auto& [key, score] : other.entries_) add(key, score);
}

std::vector<std::string> ScoreMatrix::datasets() const {
  std::set<std::string> names;
  for (const auto& [key, score] : entries_) names.insert(key.dataset);
  return {names.begin(), names.end()};
}

std::size_t ScoreMatrix::count(const std::string& system,
                               const std::string& metric,
                               bool include_missing) const {
  std::size_t n = 0;
  for (const auto& [key, score] : entries_) {
    if (key.system == system && key.metric == metric &&
        (include_missing || score)) {
      ++n;
    }
  }
  return n;
}

ScoreMatrix read_scores(std::istream& in, const std::string& source) {
  static const std::vector<std::string> kColumns = {
      "dataset", "system", "metric", "repetition", "fold", "score"};
  ScoreMatrix scores;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> column_of(kColumns.size());
  std::size_t n_fields = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line, ',');
    for (auto& f : fields) f = trim(std::move(f));
    const std::string where = source + ":" + std::to_string(line_no);
    if (!have_header) {
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(fields.begin(), fields.end(), kColumns[c]);
        if (it == fields.end()) {
          raise(ErrorCode::Parse,
                where + ": header is missing column '" + kColumns[c] + "'");
        }
        column_of[c] = static_cast<std::size_t>(it - fields.begin());
      }
      n_fields = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != n_fields) {
      raise(ErrorCode::Parse, where + ": expected " +
                                  std::to_string(n_fields) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    ScoreKey key;
    key.dataset = fields[column_of[0]];
    key.system = fields[column_of[1]];
    key.metric = fields[column_of[2]];
    if (key.dataset.empty() || key.system.empty() || key.metric.empty()) {
      raise(ErrorCode::Parse, where + ": empty identifier");
    }
    if (!parse_number(fields[column_of[3]], key.repetition) ||
        !parse_number(fields[column_of[4]], key.fold)) {
      raise(ErrorCode::Parse, where + ": repetition and fold must be "
                                      "non-negative integers");
    }
    ScoreMatrix::Score score;
    const auto& text = fields[column_of[5]];
    if (text != "NA") {
      double v = 0.0;
      if (!parse_number(text, v) || !(v >= 0.0 && v <= 1.0)) {
        raise(ErrorCode::Parse,
              where + ": score must be a decimal in [0,1] or NA, got '" +
                  text + "'");
      }
      score = v;
    }
    try {
      scores.add(std::move(key), score);
    } catch (const Error& e) {
      raise(ErrorCode::Parse, where + ": " + e.what());
    }
  }
  if (!have_header) raise(ErrorCode::Parse, source + ": missing header");
  return scores;
}

ScoreMatrix load_scores(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open scores " + path.string());
  return read_scores(in, path.string());
}

void write_scores(std::ostream& out, const ScoreMatrix& scores,
                  const std::string& manifest_ref) {
  if (!manifest_ref.empty()) out << "# manifest: " << manifest_ref << '\n';
  out << "dataset,system,metric,repetition,fold,score\n";
  for (const auto& [key, score] : scores.entries()) {
    out << key.dataset << ',' << key.system << ',' << key.metric << ','
        << key.repetition << ',' << key.fold << ','
        << (score ? format_double(*score) : std::string("NA")) << '\n';
  }
}

double RhoPolicy::resolve(std::size_t k) const {
  if (kind == Kind::Fixed) return value;
  return 1.0 / static_cast<double>(k);
}

std::string RhoPolicy::describe() const {
  if (kind == Kind::Fixed) return "fixed:" + format_double(value);
  return "inverse-k";
}

DifferenceSeries::DifferenceSeries(std::string dataset_id_,
                                   std::vector<double> x_, double rho_,
                                   std::size_t m_, std::size_t k_)
    : dataset_id(std::move(dataset_id_)),
      x(std::move(x_)),
      rho(rho_),
      m(m_),
      k(k_) {
  if (x.empty()) {
    raise(ErrorCode::InvalidArgument,
          "difference series for '" + dataset_id + "' is empty");
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      raise(ErrorCode::InvalidArgument,
            "difference series for '" + dataset_id + "' is not finite");
    }
  }
  if (!cs_rho_admissible(x.size(), rho)) {
    raise(ErrorCode::InvalidArgument,
          "rho=" + format_double(rho) + " makes the covariance of '" +
              dataset_id + "' singular or indefinite");
  }
}

double DifferenceSeries::mean() const {
  if (!x.empty() && std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) {
    return x.front();
  }
  return std::accumulate(x.begin(), x.end(), 0.0) /
         static_cast<double>(x.size());
}

double DifferenceSeries::stddev() const {
  if (x.size() < 2) return 0.0;
  if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) return 0.0;
  const double mu = mean();
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::vector<DifferenceSeries> assemble_differences(const ScoreMatrix& scores,
                                                   const std::string& system_a,
                                                   const std::string& system_b,
                                                   const std::string& metric,
                                                   RhoPolicy rho_policy) {
  using FoldKey = std::pair<std::size_t, std::size_t>;
  std::map<std::string, std::map<FoldKey, ScoreMatrix::Score>> a_by_dataset;
  std::map<std::string, std::map<FoldKey, ScoreMatrix::Score>> b_by_dataset;
  for (const auto& [key, score] : scores.entries()) {
    if (key.metric != metric) continue;
    const FoldKey fk{key.repetition, key.fold};
    // Both maps are filled for a self-comparison.
    if (key.system == system_a) a_by_dataset[key.dataset][fk] = score;
    if (key.system == system_b) b_by_dataset[key.dataset][fk] = score;
  }

  std::vector<DifferenceSeries> out;
  for (const auto& [dataset, a_scores] : a_by_dataset) {
    const auto b_it = b_by_dataset.find(dataset);
    if (b_it == b_by_dataset.end()) continue;
    const auto& b_scores = b_it->second;
    if (a_scores.size() != b_scores.size() ||
        !std::equal(a_scores.begin(), a_scores.end(), b_scores.begin(),
                    [](const auto& l, const auto& r) {
                      return l.first == r.first;
                    })) {
      raise(ErrorCode::ScoreMismatch,
            "systems '" + system_a + "' and '" + system_b +
                "' have different (repetition, fold) keys on dataset '" +
                dataset + "' for metric '" + metric + "'");
    }
    std::vector<double> x;
    std::size_t max_rep = 0;
    std::size_t max_fold = 0;
    for (const auto& [fk, a_score] : a_scores) {
      max_rep = std::max(max_rep, fk.first);
      max_fold = std::max(max_fold, fk.second);
      const auto& b_score = b_scores.at(fk);
      if (a_score && b_score) x.push_back(*a_score - *b_score);
    }
    if (x.empty()) continue;
    const std::size_t m = max_rep + 1;
    const std::size_t k = max_fold + 1;
    if (rho_policy.kind == RhoPolicy::Kind::InverseK && k < 2) {
      raise(ErrorCode::InvalidArgument,
            "dataset '" + dataset + "' has a single fold; rho = 1/k is "
                                    "undefined, pass a fixed rho");
    }
    out.emplace_back(dataset, std::move(x), rho_policy.resolve(k), m, k);
  }
  if (out.empty()) {
    raise(ErrorCode::NoSharedKeys,
          "systems '" + system_a + "' and '" + system_b +
              "' share no scored folds for metric '" + metric + "'");
  }
  return out;
}

ScoreMatrix run_external(const SplitPlan& plan, const TaggedCorpus& gold,
                         const ExternalRunOptions& options) {
  if (gold.size() != plan.n_items) {
    raise(ErrorCode::InvalidArgument,
          "corpus has " + std::to_string(gold.size()) +
              " sentences but the split plan covers " +
              std::to_string(plan.n_items));
  }
  for (const char* placeholder : {"{eval}", "{output}"}) {
    if (options.command.find(placeholder) == std::string::npos) {
      raise(ErrorCode::InvalidArgument,
            std::string("command template lacks the ") + placeholder +
                " placeholder");
    }
  }
  if (options.dataset_id.empty() || options.system_id.empty()) {
    raise(ErrorCode::InvalidArgument, "dataset and system ids are required");
  }

  const bool own_dir = options.work_dir.empty();
  const fs::path root = own_dir ? make_temp_dir() : options.work_dir;
  fs::create_directories(root);

  std::vector<FoldTask> tasks;
  for (std::size_t r = 0; r < plan.m; ++r) {
    for (std::size_t f = 0; f < plan.k; ++f) tasks.push_back({r, f});
  }
  std::vector<FoldScores> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        results[i] = run_fold(plan, gold, options, root, tasks[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers =
      std::clamp<std::size_t>(options.workers, 1, tasks.size());
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < n_workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  if (own_dir && !options.keep_files) {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ScoreMatrix scores;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    auto key = [&](const char* metric) {
      return ScoreKey{options.dataset_id, options.system_id, metric,
                      t.repetition, t.fold};
    };
    scores.add(key(metric_id::kToken), results[i].token);
    scores.add(key(metric_id::kSentence), results[i].sentence);
    scores.add(key(metric_id::kOov), results[i].oov);
  }
  return scores;
}

}  // namespace baycv
