// Stand-in for an external part-of-speech tagger, used to exercise the
// scoring harness without third-party tools.
//
//   identity  copies the gold tags of the evaluation file
//   majority  tags each word with its most frequent training tag
//   noisy     gold tags with a fraction of them replaced at random

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace {

using Line = std::pair<std::string, std::string>;  // empty token = boundary

std::vector<Line> read_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<Line> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    if (line.empty() || tab == std::string::npos) {
      lines.emplace_back();
      continue;
    }
    lines.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return lines;
}

void write_tsv(const std::string& path, const std::vector<Line>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [tok, tag] : lines) {
    if (tok.empty()) {
      out << '\n';
    } else {
      out << tok << '\t' << tag << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::uint64_t fnv1a(const std::vector<Line>& lines) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& [tok, tag] : lines) {
    for (char c : tok) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    h ^= '\n';
    h *= 1099511628211ull;
  }
  return h;
}

std::string most_frequent(const std::map<std::string, std::size_t>& counts) {
  std::string best;
  std::size_t n = 0;
  for (const auto& [tag, c] : counts) {
    if (c > n) {
      best = tag;
      n = c;
    }
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stub tagger"};
  std::string mode;
  std::string train;
  std::string eval;
  std::string output;
  double rate = 0.05;
  std::uint64_t seed = 1;
  app.add_option("--mode", mode)->required()->check(CLI::IsMember({"identity", "majority", "noisy"}));
  app.add_option("--train", train)->check(CLI::ExistingFile);
  app.add_option("--eval", eval)->required()->check(CLI::ExistingFile);
  app.add_option("--output", output)->required();
  app.add_option("--rate", rate)->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  try {
    auto lines = read_tsv(eval);
    if (mode == "majority") {
      if (train.empty()) throw std::runtime_error("--train is required for majority");
      std::map<std::string, std::map<std::string, std::size_t>> by_word;
      std::map<std::string, std::size_t> overall;
      for (const auto& [tok, tag] : read_tsv(train)) {
        if (tok.empty()) continue;
        ++by_word[tok][tag];
        ++overall[tag];
      }
      const std::string fallback = most_frequent(overall);
      for (auto& [tok, tag] : lines) {
        if (tok.empty()) continue;
        const auto it = by_word.find(tok);
        tag = it == by_word.end() ? fallback : most_frequent(it->second);
      }
    } else if (mode == "noisy") {
      std::set<std::string> tagset;
      for (const auto& [tok, tag] : lines) {
        if (!tok.empty()) tagset.insert(tag);
      }
      const std::vector<std::string> tags(tagset.begin(), tagset.end());
      std::mt19937_64 rng(seed ^ fnv1a(lines));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (auto& [tok, tag] : lines) {
        if (tok.empty() || tags.size() < 2 || u(rng) >= rate) continue;
        std::uniform_int_distribution<std::size_t> pick(0, tags.size() - 2);
        std::size_t j = pick(rng);
        if (tags[j] >= tag) ++j;
        tag = tags[j];
      }
    }
    write_tsv(output, lines);
  } catch (const std::exception& e) {
    std::cerr << "stub_tagger: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
