#include "baycv/metrics.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "baycv/error.hpp"

namespace baycv {

namespace {

void check_alignment(const TaggedCorpus& gold, const TaggedCorpus& pred) {
  if (gold.size() != pred.size()) {
    raise(ErrorCode::ShapeMismatch,
          "sentence count differs: gold " + std::to_string(gold.size()) +
              ", pred " + std::to_string(pred.size()));
  }
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& g = gold.sentences()[s];
    const auto& p = pred.sentences()[s];
    if (g.size() != p.size()) {
      raise(ErrorCode::ShapeMismatch,
            "sentence " + std::to_string(s) + " length differs: gold " +
                std::to_string(g.size()) + ", pred " +
                std::to_string(p.size()));
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i].token != p[i].token) {
        raise(ErrorCode::TokenMismatch,
              "token mismatch at sentence " + std::to_string(s) +
                  ", position " + std::to_string(i) + ": '" + g[i].token +
                  "' vs '" + p[i].token + "'");
      }
    }
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

TaggedCorpus::TaggedCorpus(std::vector<Sentence> sentences)
    : sentences_(std::move(sentences)) {
  if (sentences_.empty()) {
    raise(ErrorCode::InvalidArgument, "corpus has no sentences");
  }
  for (std::size_t s = 0; s < sentences_.size(); ++s) {
    if (sentences_[s].empty()) {
      raise(ErrorCode::InvalidArgument,
            "sentence " + std::to_string(s) + " is empty");
    }
    for (const auto& tt : sentences_[s]) {
      if (tt.token.empty() || tt.tag.empty()) {
        raise(ErrorCode::InvalidArgument,
              "empty token or tag in sentence " + std::to_string(s));
      }
    }
  }
}

std::size_t TaggedCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.size();
  return n;
}

Vocabulary Vocabulary::from_corpus(const TaggedCorpus& corpus) {
  Vocabulary v;
  for (const auto& s : corpus.sentences()) {
    for (const auto& tt : s) v.insert(tt.token);
  }
  return v;
}

TaggedCorpus read_corpus(std::istream& in, const std::string& source) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (line.empty()) {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      raise(ErrorCode::Parse, source + ":" + std::to_string(line_no) +
                                  ": expected 'token<TAB>tag'");
    }
    current.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  if (sentences.empty()) {
    raise(ErrorCode::Parse, source + ": no sentences");
  }
  return TaggedCorpus(std::move(sentences));
}

TaggedCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open corpus " + path.string());
  return read_corpus(in, path.string());
}

void write_sentences(std::ostream& out, const std::vector<Sentence>& sentences) {
  for (const auto& s : sentences) {
    for (const auto& tt : s) out << tt.token << '\t' << tt.tag << '\n';
    out << '\n';
  }
}

void write_corpus(std::ostream& out, const TaggedCorpus& corpus) {
  write_sentences(out, corpus.sentences());
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open vocabulary " + path.string());
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(std::move(line));
    if (!line.empty()) v.insert(line);
  }
  return v;
}

double token_accuracy(const TaggedCorpus& gold, const TaggedCorpus& pred) {
  check_alignment(gold, pred);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& g = gold.sentences()[s];
    const auto& p = pred.sentences()[s];
    for (std::size_t i = 0; i < g.size(); ++i) {
      correct += g[i].tag == p[i].tag;
    }
    total += g.size();
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

double sentence_accuracy(const TaggedCorpus& gold, const TaggedCorpus& pred) {
  check_alignment(gold, pred);
  std::size_t perfect = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    perfect += gold.sentences()[s] == pred.sentences()[s];
  }
  return static_cast<double>(perfect) / static_cast<double>(gold.size());
}

double oov_accuracy(const Vocabulary& train_vocab, const TaggedCorpus& gold,
                    const TaggedCorpus& pred) {
  check_alignment(gold, pred);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& g = gold.sentences()[s];
    const auto& p = pred.sentences()[s];
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (train_vocab.contains(g[i].token)) continue;
      ++total;
      correct += g[i].tag == p[i].tag;
    }
  }
  if (total == 0) {
    raise(ErrorCode::NoOovTokens,
          "every test token is in the training vocabulary");
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace baycv
