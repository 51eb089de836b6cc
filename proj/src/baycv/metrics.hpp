#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace baycv {

struct TaggedToken {
  std::string token;
  std::string tag;

  bool operator==(const TaggedToken&) const = default;
};

using Sentence = std::vector<TaggedToken>;

/// Ordered sentences of (token, tag) pairs. At least one sentence, no empty
/// sentences, no empty tokens or tags.
class TaggedCorpus {
 public:
  explicit TaggedCorpus(std::vector<Sentence> sentences);

  const std::vector<Sentence>& sentences() const { return sentences_; }
  std::size_t size() const { return sentences_.size(); }
  std::size_t token_count() const;

 private:
  std::vector<Sentence> sentences_;
};

/// Training-data tokens. Membership is exact, case-sensitive.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::unordered_set<std::string> tokens)
      : tokens_(std::move(tokens)) {}

  static Vocabulary from_corpus(const TaggedCorpus& corpus);

  bool contains(const std::string& token) const {
    return tokens_.contains(token);
  }
  void insert(std::string token) { tokens_.insert(std::move(token)); }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::unordered_set<std::string> tokens_;
};

/// One token per line as token<TAB>tag; a blank line ends a sentence.
TaggedCorpus read_corpus(std::istream& in, const std::string& source = "<stream>");
TaggedCorpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const TaggedCorpus& corpus);
void write_sentences(std::ostream& out, const std::vector<Sentence>& sentences);

/// One token per line.
Vocabulary load_vocabulary(const std::filesystem::path& path);

double token_accuracy(const TaggedCorpus& gold, const TaggedCorpus& pred);
double sentence_accuracy(const TaggedCorpus& gold, const TaggedCorpus& pred);
/// Token accuracy over gold tokens absent from `train_vocab`. Throws
/// NoOovTokens when there are none.
double oov_accuracy(const Vocabulary& train_vocab, const TaggedCorpus& gold,
                    const TaggedCorpus& pred);

}  // namespace baycv
