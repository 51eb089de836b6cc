#include "baycv/decision.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "baycv/error.hpp"
#include "baycv/stat.hpp"

namespace baycv {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Linear-interpolation sample quantile (type 7).
double quantile(std::vector<double> sorted, double p) {
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

enum class Relation { Less, Equiv, Greater };

Relation relation_of(Verdict v) {
  switch (v) {
    case Verdict::Left: return Relation::Less;
    case Verdict::Right: return Relation::Greater;
    case Verdict::Rope: return Relation::Equiv;
  }
  return Relation::Equiv;
}

Relation flip(Relation r) {
  if (r == Relation::Less) return Relation::Greater;
  if (r == Relation::Greater) return Relation::Less;
  return r;
}

const char* symbol(Relation r) {
  switch (r) {
    case Relation::Less: return " < ";
    case Relation::Greater: return " > ";
    case Relation::Equiv: return " ≈ ";
  }
  return " ? ";
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

RopeInterval::RopeInterval(double r) : halfwidth(r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    raise(ErrorCode::InvalidArgument, "rope halfwidth must be finite and >= 0");
  }
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Left: return "left";
    case Verdict::Rope: return "rope";
    case Verdict::Right: return "right";
  }
  return "?";
}

Verdict parse_verdict(const std::string& text) {
  if (text == "left") return Verdict::Left;
  if (text == "rope") return Verdict::Rope;
  if (text == "right") return Verdict::Right;
  raise(ErrorCode::Parse, "unknown verdict '" + text + "'");
}

Verdict RegionProbs::argmax() const {
  if (rope >= left && rope >= right) return Verdict::Rope;
  if (left >= right) return Verdict::Left;
  return Verdict::Right;
}

RegionProbs region_probs(double delta0, double sigma0, double nu,
                         const RopeInterval& rope) {
  const double r = rope.halfwidth;
  RegionProbs p;
  if (sigma0 == 0.0) {
    p.left = delta0 < -r ? 1.0 : 0.0;
    p.right = delta0 > r ? 1.0 : 0.0;
    p.rope = 1.0 - (p.left + p.right);
    return p;
  }
  if (!(sigma0 > 0.0) || !(nu > 0.0)) {
    raise(ErrorCode::InvalidArgument, "region_probs: need sigma0 >= 0, nu > 0");
  }
  // Both tails via the lower-tail routine.
  p.left = t_lower_tail((-r - delta0) / sigma0, nu);
  p.right = t_lower_tail((delta0 - r) / sigma0, nu);
  p.rope = std::max(0.0, 1.0 - (p.left + p.right));
  return p;
}

DecisionTriple make_triple(std::size_t n_left, std::size_t n_rope,
                           std::size_t n_right) {
  DecisionTriple t;
  t.n_left = n_left;
  t.n_rope = n_rope;
  t.n_right = n_right;
  t.n_samples = n_left + n_rope + n_right;
  if (t.n_samples == 0) {
    raise(ErrorCode::InvalidArgument, "decision triple with zero samples");
  }
  const double ns = static_cast<double>(t.n_samples);
  t.p_left = static_cast<double>(n_left) / ns;
  t.p_rope = static_cast<double>(n_rope) / ns;
  t.p_right = static_cast<double>(n_right) / ns;
  t.verdict = RegionProbs{t.p_left, t.p_rope, t.p_right}.argmax();
  return t;
}

DecisionTriple tally(const PosteriorChains& chains, const RopeInterval& rope) {
  if (chains.n_draws() == 0) {
    raise(ErrorCode::InvalidArgument, "tally: empty posterior");
  }
  if (!(chains.standardization_constant > 0.0)) {
    raise(ErrorCode::InvalidArgument, "tally: bad standardization constant");
  }
  const RopeInterval scaled(rope.halfwidth / chains.standardization_constant);
  const auto& delta0 = chains.trace("delta0");
  const auto& sigma0 = chains.trace("sigma0");
  const auto& nu = chains.trace("nu");
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t c = 0; c < delta0.chains.size(); ++c) {
    for (std::size_t d = 0; d < delta0.chains[c].size(); ++d) {
      const auto p = region_probs(delta0.chains[c][d], sigma0.chains[c][d],
                                  nu.chains[c][d], scaled);
      ++counts[static_cast<int>(p.argmax())];
    }
  }
  return make_triple(counts[static_cast<int>(Verdict::Left)],
                     counts[static_cast<int>(Verdict::Rope)],
                     counts[static_cast<int>(Verdict::Right)]);
}

RegionProbs decide(const TTestPosterior& posterior, const RopeInterval& rope) {
  const double scale = posterior.degenerate_variance ? 0.0 : posterior.scale;
  return region_probs(posterior.location, scale, posterior.dof, rope);
}

SimplexPoint simplex_coordinates(double p_left, double p_rope,
                                 double p_right) {
  (void)p_left;
  return {p_right + 0.5 * p_rope, p_rope * std::sqrt(3.0) / 2.0};
}

SimplexPoint simplex_coordinates(const DecisionTriple& triple) {
  return simplex_coordinates(triple.p_left, triple.p_rope, triple.p_right);
}

double rope_from_ci95(const std::vector<DifferenceSeries>& series) {
  std::vector<double> pooled;
  for (const auto& s : series) pooled.insert(pooled.end(), s.x.begin(), s.x.end());
  if (pooled.empty()) {
    raise(ErrorCode::InvalidArgument, "rope_from_ci95: no differences");
  }
  return 0.5 * (quantile(pooled, 0.975) - quantile(pooled, 0.025));
}

Ranking rank(const std::vector<std::string>& systems,
             const std::vector<PairVerdict>& pairs) {
  const std::size_t s = systems.size();
  if (s < 2) raise(ErrorCode::InvalidArgument, "ranking needs at least 2 systems");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s; ++i) {
    if (!index.emplace(systems[i], i).second) {
      raise(ErrorCode::InvalidArgument, "duplicate system '" + systems[i] + "'");
    }
  }

  Ranking out;
  // rel[i][j] describes system i relative to system j.
  std::vector<std::vector<std::optional<Relation>>> rel(
      s, std::vector<std::optional<Relation>>(s));
  for (const auto& p : pairs) {
    const auto a = index.find(p.system_a);
    const auto b = index.find(p.system_b);
    if (a == index.end() || b == index.end()) {
      raise(ErrorCode::InvalidArgument, "pair (" + p.system_a + ", " +
                                            p.system_b +
                                            ") names an unknown system");
    }
    if (a->second == b->second) {
      raise(ErrorCode::InvalidArgument, "pair compares " + p.system_a +
                                            " with itself");
    }
    if (rel[a->second][b->second]) {
      raise(ErrorCode::InvalidArgument, "pair (" + p.system_a + ", " +
                                            p.system_b + ") given twice");
    }
    const Relation r = relation_of(p.verdict);
    rel[a->second][b->second] = r;
    rel[b->second][a->second] = flip(r);
    out.edges.push_back(p.system_a + symbol(r) + p.system_b);
  }
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i + 1; j < s; ++j) {
      if (!rel[i][j]) {
        raise(ErrorCode::MissingPair, "no verdict for pair (" + systems[i] +
                                          ", " + systems[j] + ")");
      }
    }
  }

  DisjointSets sets(s);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i + 1; j < s; ++j) {
      if (*rel[i][j] == Relation::Equiv) sets.unite(i, j);
    }
  }
  std::vector<std::size_t> roots;
  std::vector<std::size_t> class_of(s);
  for (std::size_t i = 0; i < s; ++i) {
    const auto root = sets.find(i);
    auto it = std::find(roots.begin(), roots.end(), root);
    if (it == roots.end()) {
      roots.push_back(root);
      it = roots.end() - 1;
    }
    class_of[i] = static_cast<std::size_t>(it - roots.begin());
  }
  const std::size_t nc = roots.size();
  std::vector<std::vector<std::size_t>> members(nc);
  for (std::size_t i = 0; i < s; ++i) members[class_of[i]].push_back(i);
  auto class_name = [&](std::size_t c) {
    std::string text = "{";
    for (std::size_t k = 0; k < members[c].size(); ++k) {
      if (k) text += ", ";
      text += systems[members[c][k]];
    }
    return text + "}";
  };

  // less[c][d]: some member of c is below some member of d.
  std::vector<std::vector<bool>> less(nc, std::vector<bool>(nc, false));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      if (i == j || *rel[i][j] != Relation::Less) continue;
      if (class_of[i] == class_of[j]) {
        out.inconsistencies.push_back(
            systems[i] + " < " + systems[j] +
            " contradicts the equivalence class " + class_name(class_of[i]));
        continue;
      }
      less[class_of[i]][class_of[j]] = true;
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t d = c + 1; d < nc; ++d) {
      if (less[c][d] && less[d][c]) {
        out.inconsistencies.push_back("conflicting verdicts between " +
                                      class_name(c) + " and " + class_name(d));
      }
    }
  }

  // Topological order of the class graph (edge c -> d when c < d).
  std::vector<std::size_t> indegree(nc, 0);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t d = 0; d < nc; ++d)
      if (c != d && less[c][d]) ++indegree[d];
  std::vector<std::size_t> order;
  std::vector<bool> done(nc, false);
  for (;;) {
    std::optional<std::size_t> next;
    for (std::size_t c = 0; c < nc && !next; ++c) {
      if (!done[c] && indegree[c] == 0) next = c;
    }
    if (!next) break;
    done[*next] = true;
    order.push_back(*next);
    for (std::size_t d = 0; d < nc; ++d)
      if (*next != d && less[*next][d]) --indegree[d];
  }
  if (order.size() < nc) {
    // Every leftover class has a leftover predecessor; walk backwards until
    // a class repeats.
    std::size_t cur = 0;
    while (done[cur]) ++cur;
    std::vector<std::size_t> walk;
    std::vector<int> seen_at(nc, -1);
    while (seen_at[cur] < 0) {
      seen_at[cur] = static_cast<int>(walk.size());
      walk.push_back(cur);
      for (std::size_t p = 0; p < nc; ++p) {
        if (!done[p] && p != cur && less[p][cur]) {
          cur = p;
          break;
        }
      }
    }
    std::vector<std::size_t> cycle(walk.begin() + seen_at[cur], walk.end());
    std::reverse(cycle.begin(), cycle.end());
    std::string text = "cycle: ";
    for (auto c : cycle) text += class_name(c) + " < ";
    text += class_name(cycle.front());
    out.inconsistencies.push_back(text);
  }

  if (out.inconsistencies.empty()) {
    // A cycle-free complete comparison is a total order of the classes.
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k) out.chain += " < ";
      const auto& mem = members[order[k]];
      for (std::size_t i = 0; i < mem.size(); ++i) {
        if (i) out.chain += " ≈ ";
        out.chain += systems[mem[i]];
      }
    }
    out.consistent = true;
  }
  return out;
}

std::string format_report_row(const ReportRow& row) {
  const auto& t = row.triple;
  return row.system_a + ',' + row.system_b + ',' + row.metric + ',' +
         fmt(t.p_left) + ',' + fmt(t.p_rope) + ',' + fmt(t.p_right) + ',' +
         to_string(t.verdict) + ',' + std::to_string(t.n_samples) + ',' +
         fmt(row.rope_halfwidth);
}

}  // namespace baycv
